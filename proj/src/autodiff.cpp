#include "swn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swn/error.hpp"

namespace swn {

// ---------------------------------------------------------------- ParamStore

void ParamStore::add(const std::string& name, Tensor value) {
  if (slots_.count(name)) throw DomainError("duplicate parameter '" + name + "'");
  Slot s;
  s.grad = Tensor(value.shape, 0.0);
  s.m = Tensor(value.shape, 0.0);
  s.v = Tensor(value.shape, 0.0);
  s.value = std::move(value);
  slots_.emplace(name, std::move(s));
}

ParamStore::Slot& ParamStore::slot(const std::string& name) {
  const auto it = slots_.find(name);
  if (it == slots_.end()) throw IndexError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::value(const std::string& name) { return slot(name).value; }
Tensor& ParamStore::grad(const std::string& name) { return slot(name).grad; }

const Tensor& ParamStore::value(const std::string& name) const {
  return const_cast<ParamStore*>(this)->slot(name).value;
}

const Tensor& ParamStore::grad(const std::string& name) const {
  return const_cast<ParamStore*>(this)->slot(name).grad;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& [name, _] : slots_) out.push_back(name);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, s] : slots_) n += s.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, s] : slots_) std::fill(s.grad.values.begin(), s.grad.values.end(), 0.0);
  pending_ = false;
}

json ParamStore::to_checkpoint() const {
  json params = json::object();
  for (const auto& [name, s] : slots_) {
    params[name] = {{"shape", s.value.shape}, {"values", s.value.values}};
  }
  return {{"step", step_}, {"params", std::move(params)}};
}

void ParamStore::load_checkpoint(const json& j) {
  try {
    const auto& params = j.at("params");
    if (params.size() != slots_.size()) {
      throw CompatibilityError("checkpoint has " + std::to_string(params.size()) +
                               " parameters, model expects " + std::to_string(slots_.size()));
    }
    for (auto& [name, s] : slots_) {
      if (!params.contains(name)) {
        throw CompatibilityError("checkpoint lacks parameter '" + name + "'");
      }
      const auto& p = params.at(name);
      auto shape = p.at("shape").get<std::vector<std::size_t>>();
      if (shape != s.value.shape) {
        throw CompatibilityError("parameter '" + name + "' has shape " +
                                 Tensor(shape).shape_string() + " in checkpoint, model expects " +
                                 s.value.shape_string());
      }
      auto values = p.at("values").get<std::vector<double>>();
      if (values.size() != s.value.size()) {
        throw CompatibilityError("parameter '" + name + "' value count mismatch");
      }
      s.value.values = std::move(values);
    }
    step_ = j.at("step").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.slots_.size() != b.slots_.size() || a.step_ != b.step_) return false;
  for (const auto& [name, s] : a.slots_) {
    const auto it = b.slots_.find(name);
    if (it == b.slots_.end() || !(it->second.value == s.value)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------- Tape

Var Tape::constant(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::param(const std::string& name) {
  if (!ro_) throw StateError("tape has no parameter store");
  Node n;
  n.param_value = &ro_->value(name);
  n.param_name = name;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::push(Tensor value, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.param_value ? *n.param_value : n.value;
}

Tensor& Tape::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.param_value && rw_) return rw_->grad(n.param_name);
  if (!n.has_grad) {
    n.grad = Tensor(value(v).shape, 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

bool Tape::has_grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.has_grad || (n.param_value && rw_);
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) throw ShapeError("backward() needs a scalar loss");
  grad(loss).values[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
  }
  if (rw_) rw_->mark_gradients();
}

// ----------------------------------------------------------------------- ops

namespace ops {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

Var conv_impl(Tape& t, Var x, Var w, Var b, std::size_t dilation, std::size_t pad_left,
              const char* name) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  require(xv.rank() == 2, std::string(name) + ": input must be [C_in x s], got " +
                              xv.shape_string());
  require(wv.rank() == 3, std::string(name) + ": weights must be [C_out x C_in x k]");
  require(wv.dim(1) == xv.dim(0), std::string(name) + ": weights expect " +
                                      std::to_string(wv.dim(1)) + " input channels, got " +
                                      std::to_string(xv.dim(0)));
  require(bv.rank() == 1 && bv.dim(0) == wv.dim(0), std::string(name) + ": bias shape mismatch");
  require(wv.dim(2) >= 1 && dilation >= 1, std::string(name) + ": kernel and dilation >= 1");

  kernels::Conv1dShape shape{xv.dim(0), wv.dim(0), wv.dim(2), dilation, pad_left, xv.dim(1)};
  Tensor y({shape.out_channels, shape.length});
  if (shape.length > 0) {
    if (t.exec() == Exec::parallel) {
      kernels::parallel::conv1d_forward(shape, xv.values, wv.values, bv.values, y.values);
    } else {
      kernels::serial::conv1d_forward(shape, xv.values, wv.values, bv.values, y.values);
    }
  }
  return t.push(std::move(y), [x, w, b, shape](Tape& tp, std::size_t self) {
    if (shape.length == 0) return;
    const Tensor& dy = tp.grad(self);
    Tensor& dx = tp.grad(x);
    Tensor& dw = tp.grad(w);
    Tensor& db = tp.grad(b);
    const Tensor& xv2 = tp.value(x);
    const Tensor& wv2 = tp.value(w);
    if (tp.exec() == Exec::parallel) {
      kernels::parallel::conv1d_backward(shape, xv2.values, wv2.values, dy.values, dx.values,
                                         dw.values, db.values);
    } else {
      kernels::serial::conv1d_backward(shape, xv2.values, wv2.values, dy.values, dx.values,
                                       dw.values, db.values);
    }
  });
}

double log_sum_exp(const double* z, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, z[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(z[i] - mx);
  return mx + std::log(s);
}

// S = U V^T / tau, row-major N x N.
std::vector<double> similarity(const Tensor& u, const Tensor& v, double tau) {
  const std::size_t n = u.dim(0), p = u.dim(1);
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < p; ++k) acc += u.at(i, k) * v.at(j, k);
      s[i * n + j] = acc / tau;
    }
  }
  return s;
}

void check_pair(const Tensor& u, const Tensor& v, double tau) {
  require(u.rank() == 2 && v.rank() == 2 && u.shape == v.shape,
          "infonce: representations must be equal-shape [N x p] matrices");
  if (u.dim(0) < 2) throw DomainError("infonce needs N >= 2 (no negatives otherwise)");
  if (!(tau > 0.0)) throw DomainError("infonce temperature must be positive");
}

}  // namespace

Var embed_lookup(Tape& t, Var table, std::span<const int> tokens) {
  const Tensor& tab = t.value(table);
  require(tab.rank() == 2, "embed_lookup: table must be [V x E]");
  const std::size_t words = tab.dim(0), e = tab.dim(1);
  std::vector<int> toks(tokens.begin(), tokens.end());
  Tensor out({toks.size(), e});
  for (std::size_t j = 0; j < toks.size(); ++j) {
    if (toks[j] < 0 || static_cast<std::size_t>(toks[j]) >= words) {
      throw IndexError("token " + std::to_string(toks[j]) + " outside vocabulary of " +
                       std::to_string(words));
    }
    std::copy_n(tab.values.begin() + static_cast<long>(static_cast<std::size_t>(toks[j]) * e), e,
                out.values.begin() + static_cast<long>(j * e));
  }
  return t.push(std::move(out), [table, toks = std::move(toks), e](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gt = tp.grad(table);
    for (std::size_t j = 0; j < toks.size(); ++j) {
      const std::size_t row = static_cast<std::size_t>(toks[j]) * e;
      for (std::size_t c = 0; c < e; ++c) gt.values[row + c] += g.values[j * e + c];
    }
  });
}

Var transpose(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  require(xv.rank() == 2, "transpose: input must be 2-D");
  const std::size_t r = xv.dim(0), c = xv.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out.values[j * r + i] = xv.values[i * c + j];
  }
  return t.push(std::move(out), [x, r, c](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(x);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) gx.values[i * c + j] += g.values[j * r + i];
    }
  });
}

Var concat_rows(Tape& t, std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const std::size_t cols = t.value(parts[0]).rank() == 2 ? t.value(parts[0]).dim(1) : 0;
  std::size_t rows = 0;
  std::vector<double> data;
  std::vector<Var> ins(parts.begin(), parts.end());
  for (auto p : ins) {
    const Tensor& v = t.value(p);
    require(v.rank() == 2 && v.dim(1) == cols, "concat_rows: column counts differ");
    rows += v.dim(0);
    data.insert(data.end(), v.values.begin(), v.values.end());
  }
  return t.push(Tensor({rows, cols}, std::move(data)), [ins](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t at = 0;
    for (auto p : ins) {
      Tensor& gp = tp.grad(p);
      for (auto& v : gp.values) v += g.values[at++];
    }
  });
}

Var stack(Tape& t, std::span<const Var> rows) {
  require(!rows.empty(), "stack: no inputs");
  const std::size_t p = t.value(rows[0]).size();
  std::vector<Var> ins(rows.begin(), rows.end());
  std::vector<double> data;
  data.reserve(ins.size() * p);
  for (auto r : ins) {
    const Tensor& v = t.value(r);
    require(v.rank() == 1 && v.size() == p, "stack: rows must be equal-length vectors");
    data.insert(data.end(), v.values.begin(), v.values.end());
  }
  return t.push(Tensor({ins.size(), p}, std::move(data)), [ins, p](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    for (std::size_t r = 0; r < ins.size(); ++r) {
      Tensor& gr = tp.grad(ins[r]);
      for (std::size_t k = 0; k < p; ++k) gr.values[k] += g.values[r * p + k];
    }
  });
}

Var flatten(Tape& t, Var x) {
  Tensor out = t.value(x);
  out.shape = {out.values.size()};
  return t.push(std::move(out), [x](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.values[i] += g.values[i];
  });
}

Var causal_dilated_conv1d(Tape& t, Var x, Var w, Var b, std::size_t dilation) {
  const Tensor& wv = t.value(w);
  require(wv.rank() == 3, "causal_dilated_conv1d: weights must be [C_out x C_in x k]");
  if (dilation < 1) throw ShapeError("causal_dilated_conv1d: dilation must be >= 1");
  return conv_impl(t, x, w, b, dilation, (wv.dim(2) - 1) * dilation, "causal_dilated_conv1d");
}

Var conv1d_same(Tape& t, Var x, Var w, Var b) {
  const Tensor& wv = t.value(w);
  require(wv.rank() == 3, "conv1d_same: weights must be [C_out x C_in x k]");
  return conv_impl(t, x, w, b, 1, (wv.dim(2) - 1) / 2, "conv1d_same");
}

Var relu(Tape& t, Var x) {
  Tensor out = t.value(x);
  for (auto& v : out.values) v = v > 0.0 ? v : 0.0;
  return t.push(std::move(out), [x](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& xv = tp.value(x);
    Tensor& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv.values[i] > 0.0) gx.values[i] += g.values[i];
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require(av.shape == bv.shape, "add: shapes " + av.shape_string() + " and " +
                                    bv.shape_string() + " differ");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += bv.values[i];
  return t.push(std::move(out), [a, b](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.values[i] += g.values[i];
    Tensor& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb.values[i] += g.values[i];
  });
}

Var scale(Tape& t, Var x, double factor) {
  Tensor out = t.value(x);
  for (auto& v : out.values) v *= factor;
  return t.push(std::move(out), [x, factor](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.values[i] += factor * g.values[i];
  });
}

Var global_max_pool(Tape& t, Var x) {
  const Tensor& xv = t.value(x);
  require(xv.rank() == 2, "global_max_pool: input must be [C x s]");
  const std::size_t c = xv.dim(0), s = xv.dim(1);
  if (s == 0) throw ShapeError("global_max_pool: empty time axis");
  Tensor out({c});
  std::vector<std::size_t> arg(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* row = xv.values.data() + ch * s;
    std::size_t best = 0;
    for (std::size_t k = 1; k < s; ++k) {
      if (row[k] > row[best]) best = k;
    }
    arg[ch] = best;
    out.values[ch] = row[best];
  }
  return t.push(std::move(out), [x, arg = std::move(arg), s](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(x);
    for (std::size_t ch = 0; ch < arg.size(); ++ch) gx.values[ch * s + arg[ch]] += g.values[ch];
  });
}

Var linear(Tape& t, Var x, Var w, Var b) {
  const Tensor& xv = t.value(x);
  const Tensor& wv = t.value(w);
  const Tensor& bv = t.value(b);
  require(xv.rank() == 1, "linear: input must be a vector");
  require(wv.rank() == 2 && wv.dim(1) == xv.dim(0),
          "linear: weights " + wv.shape_string() + " do not accept input " + xv.shape_string());
  require(bv.rank() == 1 && bv.dim(0) == wv.dim(0), "linear: bias shape mismatch");
  const std::size_t c = wv.dim(0), p = wv.dim(1);
  Tensor out({c});
  for (std::size_t r = 0; r < c; ++r) {
    double acc = bv.values[r];
    for (std::size_t k = 0; k < p; ++k) acc += wv.values[r * p + k] * xv.values[k];
    out.values[r] = acc;
  }
  return t.push(std::move(out), [x, w, b, c, p](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& xv2 = tp.value(x);
    const Tensor& wv2 = tp.value(w);
    Tensor& gw = tp.grad(w);
    Tensor& gb = tp.grad(b);
    Tensor& gx = tp.grad(x);
    for (std::size_t r = 0; r < c; ++r) {
      const double gr = g.values[r];
      gb.values[r] += gr;
      for (std::size_t k = 0; k < p; ++k) {
        gw.values[r * p + k] += gr * xv2.values[k];
        gx.values[k] += gr * wv2.values[r * p + k];
      }
    }
  });
}

Var sum(Tape& t, std::span<const Var> scalars) {
  std::vector<Var> ins(scalars.begin(), scalars.end());
  double acc = 0.0;
  for (auto s : ins) acc += t.value(s).item();
  return t.push(Tensor::scalar(acc), [ins](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).values[0];
    for (auto s : ins) tp.grad(s).values[0] += g;
  });
}

Var softmax_cross_entropy(Tape& t, Var logits, int target) {
  const Tensor& z = t.value(logits);
  require(z.rank() == 1, "softmax_cross_entropy: logits must be a vector");
  if (z.size() < 2) throw ShapeError("softmax_cross_entropy needs at least two classes");
  if (target < 0 || static_cast<std::size_t>(target) >= z.size()) {
    throw IndexError("target class " + std::to_string(target) + " outside [0, " +
                     std::to_string(z.size()) + ")");
  }
  const double lse = log_sum_exp(z.values.data(), z.size());
  const double loss = lse - z.values[static_cast<std::size_t>(target)];
  return t.push(Tensor::scalar(loss), [logits, target, lse](Tape& tp, std::size_t self) {
    const double g = tp.grad(self).values[0];
    const Tensor& zv = tp.value(logits);
    Tensor& gz = tp.grad(logits);
    for (std::size_t c = 0; c < zv.size(); ++c) {
      const double p = std::exp(zv.values[c] - lse);
      gz.values[c] += g * (p - (static_cast<int>(c) == target ? 1.0 : 0.0));
    }
  });
}

Var infonce_pair_loss(Tape& t, Var reps_u, Var reps_v, double tau) {
  const Tensor& u = t.value(reps_u);
  const Tensor& v = t.value(reps_v);
  check_pair(u, v, tau);
  const std::size_t n = u.dim(0);
  std::vector<double> s = similarity(u, v, tau);
  // Row-wise softmax kept for the backward pass.
  std::vector<double> soft(n * n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lse = log_sum_exp(s.data() + i * n, n);
    loss += lse - s[i * n + i];
    for (std::size_t j = 0; j < n; ++j) soft[i * n + j] = std::exp(s[i * n + j] - lse);
  }
  loss /= static_cast<double>(n);
  return t.push(Tensor::scalar(loss), [reps_u, reps_v, tau, n, soft = std::move(soft)](
                                          Tape& tp, std::size_t self) {
    const double g = tp.grad(self).values[0];
    const Tensor& uv = tp.value(reps_u);
    const Tensor& vv = tp.value(reps_v);
    const std::size_t p = uv.dim(1);
    // dL/dS_ij = g * (softmax_ij - [i == j]) / N
    std::vector<double> ds(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        ds[i * n + j] = g * (soft[i * n + j] - (i == j ? 1.0 : 0.0)) / static_cast<double>(n);
      }
    }
    Tensor& gu = tp.grad(reps_u);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = ds[i * n + j] / tau;
        for (std::size_t k = 0; k < p; ++k) gu.values[i * p + k] += d * vv.values[j * p + k];
      }
    }
    Tensor& gv = tp.grad(reps_v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = ds[i * n + j] / tau;
        for (std::size_t k = 0; k < p; ++k) gv.values[j * p + k] += d * uv.values[i * p + k];
      }
    }
  });
}

Var cross_scale_loss(Tape& t, std::span<const Var> reps, double tau) {
  const std::size_t h = reps.size();
  if (h < 2) throw DomainError("cross_scale_loss needs at least two scales");
  std::vector<Var> pair_losses;
  for (std::size_t u = 0; u + 1 < h; ++u) {
    for (std::size_t v = u + 1; v < h; ++v) {
      pair_losses.push_back(infonce_pair_loss(t, reps[u], reps[v], tau));
    }
  }
  const Var total = sum(t, pair_losses);
  return scale(t, total, 1.0 / static_cast<double>(pair_losses.size()));
}

}  // namespace ops

double softmax_cross_entropy_value(std::span<const double> logits, int target) {
  Tape t;
  const Var z = t.constant(Tensor::vector({logits.begin(), logits.end()}));
  return t.value(ops::softmax_cross_entropy(t, z, target)).item();
}

double infonce_pair_loss_value(const Tensor& reps_u, const Tensor& reps_v, double tau) {
  Tape t;
  const Var u = t.constant(reps_u);
  const Var v = t.constant(reps_v);
  return t.value(ops::infonce_pair_loss(t, u, v, tau)).item();
}

double infonce_literal_value(const Tensor& reps_u, const Tensor& reps_v, double tau) {
  ops::check_pair(reps_u, reps_v, tau);
  const std::size_t n = reps_u.dim(0);
  const auto s = ops::similarity(reps_u, reps_v, tau);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += s[i * n + j];
    const double ratio = s[i * n + i] / denom;
    if (!(ratio > 0.0) || !std::isfinite(ratio)) return std::numeric_limits<double>::quiet_NaN();
    loss -= std::log(ratio);
  }
  return loss / static_cast<double>(n);
}

}  // namespace swn
