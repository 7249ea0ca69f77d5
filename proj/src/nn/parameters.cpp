#include "nn/parameters.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"

namespace wsground::nn {

ParameterStore::ParameterStore(const ParameterStore& other) { *this = other; }

ParameterStore& ParameterStore::operator=(const ParameterStore& other) {
  if (this == &other) return *this;
  params_.clear();
  index_ = other.index_;
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
  return *this;
}

Parameter& ParameterStore::add(const std::string& name, Matrix value, ParamGroup group) {
  if (index_.count(name)) throw ContractError("duplicate parameter name " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::Zero(value.rows(), value.cols());
  p->value = std::move(value);
  p->group = group;
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter " + name);
  return *params_[it->second];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
}

std::uint64_t ParameterStore::checksum() const {
  Fnv1a h;
  for (const auto& p : params_) {
    h.str(p->name).i64(p->value.rows()).i64(p->value.cols());
    h.bytes(p->value.data(), static_cast<std::size_t>(p->value.size()) * sizeof(double));
  }
  return h.digest();
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

void Adam::step(ParameterStore& params, double base_lr, double transformer_lr) {
  ++t_;
  double clip = 1.0;
  if (options_.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) sq += params[i].grad.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > options_.max_grad_norm) clip = options_.max_grad_norm / norm;
  }
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (!p.grad.allFinite()) throw NumericError("non-finite gradient for parameter " + p.name);
    auto [it, fresh] = moments_.try_emplace(p.name);
    auto& [m, v] = it->second;
    if (fresh) {
      m = Matrix::Zero(p.value.rows(), p.value.cols());
      v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    const Matrix g = p.grad * clip;
    m = options_.beta1 * m + (1.0 - options_.beta1) * g;
    v = options_.beta2 * v + (1.0 - options_.beta2) * g.cwiseProduct(g);
    const double lr = p.group == ParamGroup::transformer ? transformer_lr : base_lr;
    p.value.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + options_.eps);
  }
}

}  // namespace wsground::nn
