#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace wsground::nn {

using Matrix = Eigen::MatrixXd;

struct Parameter;
class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  explicit operator bool() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode recording of matrix-valued operations. Each op stores its
// output value and a closure that maps the output gradient onto its inputs.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a trainable parameter; backward() accumulates into
  /// Parameter::grad. Repeated calls for one parameter return the same leaf.
  Var parameter(Parameter& param);

  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Seeds d(root)/d(root) = 1 on a 1x1 root and propagates to every parameter.
  void backward(const Var& root);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  void accumulate(int id, const Matrix& grad);
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> leaves_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

// Differentiable ops. Shapes follow Eigen's (rows, cols); "row" ops act on
// each row independently.
Var matmul(const Var& a, const Var& b);
Var matmul_bt(const Var& a, const Var& b);  // a * b^T
Var add(const Var& a, const Var& b);
Var add_row_bias(const Var& a, const Var& bias);  // bias is 1 x cols
Var scale(const Var& a, double s);
Var mix(const Var& a, const Var& b, double alpha);  // alpha*a + (1-alpha)*b
Var relu(const Var& a);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var& a, std::vector<int> indices);
/// Max over consecutive blocks of group_size rows; rows() must be a multiple of group_size.
Var segment_max(const Var& a, Eigen::Index group_size);
Var softmax_rows(const Var& a);
Var layer_norm_rows(const Var& a, const Var& gamma, const Var& beta, double eps = 1e-5);
Var l2_normalize_rows(const Var& a, double eps = 1e-12);
Var sum_all(const Var& a);
/// Sum of w_i * s_i over 1x1 inputs.
Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);

}  // namespace wsground::nn
