#include "nn/tape.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"
#include "nn/parameters.hpp"

namespace wsground::nn {

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::parameter(Parameter& param) {
  if (auto it = leaves_.find(&param); it != leaves_.end()) return {this, it->second};
  Node node;
  node.value = param.value;
  node.requires_grad = true;
  node.param = &param;
  nodes_.push_back(std::move(node));
  leaves_[&param] = static_cast<int>(nodes_.size() - 1);
  return {this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  Node node;
  node.value = std::move(value);
  for (const auto& in : inputs) {
    if (in.tape() != this) throw ContractError("autodiff: mixing variables from different tapes");
    node.requires_grad = node.requires_grad || requires_grad(in.id());
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::accumulate(int id, const Matrix& grad) {
  auto& node = nodes_[static_cast<std::size_t>(id)];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0)
    node.grad = grad;
  else
    node.grad += grad;
}

void Tape::backward(const Var& root) {
  if (root.tape() != this || root.rows() != 1 || root.cols() != 1)
    throw ContractError("autodiff: backward needs a 1x1 root on this tape");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  accumulate(root.id(), Matrix::Ones(1, 1));
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    auto& node = nodes_[i];
    if (node.grad.size() == 0) continue;
    if (node.backward) node.backward(*this, node.grad);
    if (node.param) {
      if (node.param->grad.size() == 0) node.param->grad = Matrix::Zero(node.value.rows(), node.value.cols());
      node.param->grad += node.grad;
    }
  }
}

namespace {
void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractError(std::string("autodiff ") + op + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
}
}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw ContractError("autodiff matmul: inner dimensions differ");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var matmul_bt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw ContractError("autodiff matmul_bt: column counts differ");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value().transpose(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib));
    if (t.requires_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var add_row_bias(const Var& a, const Var& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw ContractError("autodiff add_row_bias: bias shape");
  const int ia = a.id(), ib = bias.id();
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return a.tape()->record(std::move(out), {a, bias}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
  });
}

Var scale(const Var& a, double s) {
  const int ia = a.id();
  return a.tape()->record(a.value() * s, {a}, [ia, s](Tape& t, const Matrix& g) { t.accumulate(ia, g * s); });
}

Var mix(const Var& a, const Var& b, double alpha) {
  require_same_shape(a, b, "mix");
  const int ia = a.id(), ib = b.id();
  return a.tape()->record(alpha * a.value() + (1.0 - alpha) * b.value(), {a, b},
                          [ia, ib, alpha](Tape& t, const Matrix& g) {
                            if (t.requires_grad(ia)) t.accumulate(ia, alpha * g);
                            if (t.requires_grad(ib)) t.accumulate(ib, (1.0 - alpha) * g);
                          });
}

Var relu(const Var& a) {
  const int ia = a.id();
  return a.tape()->record(a.value().cwiseMax(0.0), {a}, [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, (t.value(ia).array() > 0.0).select(g, 0.0));
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("autodiff concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ContractError("autodiff concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    layout.emplace_back(p.id(), r);
    r += p.rows();
  }
  return parts[0].tape()->record(std::move(out), parts, [layout](Tape& t, const Matrix& g) {
    for (const auto& [id, start] : layout)
      if (t.requires_grad(id)) t.accumulate(id, g.middleRows(start, t.value(id).rows()));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("autodiff concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts[0].rows();
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ContractError("autodiff concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    layout.emplace_back(p.id(), c);
    c += p.cols();
  }
  return parts[0].tape()->record(std::move(out), parts, [layout](Tape& t, const Matrix& g) {
    for (const auto& [id, start] : layout)
      if (t.requires_grad(id)) t.accumulate(id, g.middleCols(start, t.value(id).cols()));
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw ContractError("autodiff slice_cols: out of range");
  const int ia = a.id();
  return a.tape()->record(a.value().middleCols(start, count), {a}, [ia, start, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
    full.middleCols(start, count) = g;
    t.accumulate(ia, full);
  });
}

Var gather_rows(const Var& a, std::vector<int> indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), a.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= a.rows()) throw ContractError("autodiff gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = a.value().row(indices[i]);
  }
  const int ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, idx = std::move(indices)](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(ia, full);
  });
}

Var segment_max(const Var& a, Eigen::Index group_size) {
  if (group_size < 1 || a.rows() % group_size != 0)
    throw ContractError("autodiff segment_max: rows not divisible by group size");
  const Eigen::Index groups = a.rows() / group_size;
  const Matrix& x = a.value();
  Matrix out(groups, x.cols());
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(groups * x.cols()));
  for (Eigen::Index gi = 0; gi < groups; ++gi)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Eigen::Index best = gi * group_size;
      for (Eigen::Index r = best + 1; r < (gi + 1) * group_size; ++r)
        if (x(r, c) > x(best, c)) best = r;
      out(gi, c) = x(best, c);
      argmax[static_cast<std::size_t>(gi * x.cols() + c)] = best;
    }
  const int ia = a.id();
  return a.tape()->record(std::move(out), {a}, [ia, argmax = std::move(argmax)](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(ia).rows(), t.value(ia).cols());
    for (Eigen::Index gi = 0; gi < g.rows(); ++gi)
      for (Eigen::Index c = 0; c < g.cols(); ++c) full(argmax[static_cast<std::size_t>(gi * g.cols() + c)], c) += g(gi, c);
    t.accumulate(ia, full);
  });
}

Var softmax_rows(const Var& a) {
  Matrix y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  const int ia = a.id();
  Matrix y_copy = y;
  return a.tape()->record(std::move(y), {a}, [ia, s = std::move(y_copy)](Tape& t, const Matrix& g) {
    const Eigen::VectorXd dot = (g.array() * s.array()).rowwise().sum();
    const Matrix centered = g.colwise() - dot;
    t.accumulate(ia, s.cwiseProduct(centered));
  });
}

Var layer_norm_rows(const Var& a, const Var& gamma, const Var& beta, double eps) {
  if (gamma.rows() != 1 || gamma.cols() != a.cols() || beta.rows() != 1 || beta.cols() != a.cols())
    throw ContractError("autodiff layer_norm_rows: gamma/beta shape");
  const Matrix& x = a.value();
  const Eigen::Index n = x.cols();
  Matrix xhat(x.rows(), n);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv_std(r);
  }
  Matrix y = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() + beta.value().row(0).array();
  const int ia = a.id(), ig = gamma.id(), ib = beta.id();
  return a.tape()->record(
      std::move(y), {a, gamma, beta},
      [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, const Matrix& g) {
        if (t.requires_grad(ig)) t.accumulate(ig, (g.array() * xhat.array()).colwise().sum().matrix());
        if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
        if (t.requires_grad(ia)) {
          const Matrix dxhat = g.array().rowwise() * t.value(ig).row(0).array();
          Matrix dx(dxhat.rows(), dxhat.cols());
          for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
            const double mean_d = dxhat.row(r).mean();
            const double mean_dx = (dxhat.row(r).array() * xhat.row(r).array()).mean();
            dx.row(r) = inv_std(r) * (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx);
          }
          t.accumulate(ia, dx);
        }
      });
}

Var l2_normalize_rows(const Var& a, double eps) {
  const Matrix& x = a.value();
  Eigen::VectorXd norms = x.rowwise().norm().cwiseMax(eps);
  Matrix y = x.array().colwise() / norms.array();
  const int ia = a.id();
  Matrix y_copy = y;
  return a.tape()->record(std::move(y), {a},
                          [ia, y = std::move(y_copy), norms = std::move(norms)](Tape& t, const Matrix& g) {
                            const Eigen::VectorXd dot = (g.array() * y.array()).rowwise().sum();
                            const Matrix along = y.array().colwise() * dot.array();
                            const Matrix dx = (g - along).array().colwise() / norms.array();
                            t.accumulate(ia, dx);
                          });
}

Var sum_all(const Var& a) {
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->record(std::move(out), {a}, [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix::Constant(t.value(ia).rows(), t.value(ia).cols(), g(0, 0)));
  });
}

Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights) {
  if (scalars.empty() || scalars.size() != weights.size())
    throw ContractError("autodiff weighted_sum: need one weight per scalar");
  Matrix out = Matrix::Zero(1, 1);
  std::vector<std::pair<int, double>> terms;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].rows() != 1 || scalars[i].cols() != 1) throw ContractError("autodiff weighted_sum: non-scalar");
    out(0, 0) += weights[i] * scalars[i].scalar();
    terms.emplace_back(scalars[i].id(), weights[i]);
  }
  return scalars[0].tape()->record(std::move(out), scalars, [terms](Tape& t, const Matrix& g) {
    for (const auto& [id, w] : terms)
      if (w != 0.0) t.accumulate(id, g * w);
  });
}

}  // namespace wsground::nn
