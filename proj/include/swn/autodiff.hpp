#pragma once

// Recorded-tape reverse-mode differentiation over a small operator set.
// A Tape records one forward pass; backward() walks it in reverse and
// accumulates parameter gradients into the ParamStore the tape was bound to.

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "swn/json_io.hpp"
#include "swn/kernels.hpp"
#include "swn/tensor.hpp"

namespace swn {

class ParamStore {
 public:
  struct Slot {
    Tensor value;
    Tensor grad;
    Tensor m;  // Adam first moment
    Tensor v;  // Adam second moment
  };

  // Registers a parameter; throws DomainError on a duplicate name.
  void add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return slots_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  Slot& slot(const std::string& name);

  std::vector<std::string> names() const;
  std::size_t parameter_count() const;

  std::size_t step() const { return step_; }
  void set_step(std::size_t t) { step_ = t; }
  bool has_pending_gradients() const { return pending_; }
  void mark_gradients() { pending_ = true; }
  void zero_grad();

  // {"step": t, "params": {name: {"shape": [...], "values": [...]}}}
  json to_checkpoint() const;
  // Replaces values of an identically shaped store. Throws
  // CompatibilityError when names or shapes differ.
  void load_checkpoint(const json& j);

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, Slot> slots_;
  std::size_t step_ = 0;
  bool pending_ = false;
};

struct Var {
  std::size_t id = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  explicit Tape(ParamStore& store) : rw_(&store), ro_(&store) {}
  // Forward-only binding; backward() through parameters is not allowed.
  explicit Tape(const ParamStore& store) : ro_(&store) {}

  Var constant(Tensor value);
  Var param(const std::string& name);
  Var push(Tensor value, Backward backward);

  const Tensor& value(Var v) const;
  // Gradient buffer of a node, zero-initialized on first access.
  Tensor& grad(Var v);
  Tensor& grad(std::size_t id) { return grad(Var{id}); }
  bool has_grad(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be a scalar.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  Exec exec() const { return exec_; }
  void set_exec(Exec e) { exec_ = e; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    const Tensor* param_value = nullptr;
    std::string param_name;
    Backward backward;
  };

  ParamStore* rw_ = nullptr;
  const ParamStore* ro_ = nullptr;
  std::vector<Node> nodes_;
  Exec exec_ = Exec::parallel;
};

namespace ops {

// [V x E] table, tokens -> [s x E]
Var embed_lookup(Tape& t, Var table, std::span<const int> tokens);
Var transpose(Tape& t, Var x);
// Concatenates 2-D tensors with equal column counts along rows.
Var concat_rows(Tape& t, std::span<const Var> parts);
// Stacks equal-length 1-D tensors into a [n x p] matrix.
Var stack(Tape& t, std::span<const Var> rows);
Var flatten(Tape& t, Var x);

// [C_in x s] input, [C_out x C_in x k] weights, [C_out] bias -> [C_out x s]
// with (k-1)*dilation zeros on the left.
Var causal_dilated_conv1d(Tape& t, Var x, Var w, Var b, std::size_t dilation);
// Same convolution with (k-1)/2 zeros on the left and the rest on the right.
Var conv1d_same(Tape& t, Var x, Var w, Var b);

Var relu(Tape& t, Var x);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double factor);
// [C x s] -> [C], gradient routed to the first maximal position.
Var global_max_pool(Tape& t, Var x);
// W [c x p], x [p], b [c] -> W x + b
Var linear(Tape& t, Var x, Var w, Var b);
// Sum of scalar nodes.
Var sum(Tape& t, std::span<const Var> scalars);

Var softmax_cross_entropy(Tape& t, Var logits, int target);
// Mean over anchors i of -log softmax_j(u_i . v_j / tau)[i].
Var infonce_pair_loss(Tape& t, Var reps_u, Var reps_v, double tau);
// Mean of infonce_pair_loss over all unordered scale pairs.
Var cross_scale_loss(Tape& t, std::span<const Var> reps, double tau);

}  // namespace ops

// Value-only evaluations used for comparisons and reporting.
double softmax_cross_entropy_value(std::span<const double> logits, int target);
double infonce_pair_loss_value(const Tensor& reps_u, const Tensor& reps_v, double tau);
// The ratio with raw similarities in place of exponentials. NaN when the
// ratio is not positive. Evaluation only.
double infonce_literal_value(const Tensor& reps_u, const Tensor& reps_v, double tau);

}  // namespace swn
