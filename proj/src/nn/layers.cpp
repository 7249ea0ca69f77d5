#include "nn/layers.hpp"

#include "common/hash.hpp"

namespace wsground::nn {

void add_linear(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                ParamGroup group, std::uint64_t seed) {
  store.add(prefix + ".weight", glorot_uniform(in, out, mix_seed(seed, hash_string(prefix))), group);
  store.add(prefix + ".bias", Matrix::Zero(1, out), group);
}

Var linear(Tape& tape, ParameterStore& store, const std::string& prefix, const Var& x) {
  Var w = tape.parameter(store.get(prefix + ".weight"));
  Var b = tape.parameter(store.get(prefix + ".bias"));
  return add_row_bias(matmul(x, w), b);
}

void add_mlp(ParameterStore& store, const std::string& prefix, Eigen::Index in, const std::vector<int>& widths,
             ParamGroup group, std::uint64_t seed) {
  for (std::size_t i = 0; i < widths.size(); ++i) {
    add_linear(store, prefix + "." + std::to_string(i), in, widths[i], group, seed);
    in = widths[i];
  }
}

Var mlp_relu(Tape& tape, ParameterStore& store, const std::string& prefix, const Var& x, std::size_t layers) {
  Var h = x;
  for (std::size_t i = 0; i < layers; ++i) h = relu(linear(tape, store, prefix + "." + std::to_string(i), h));
  return h;
}

void add_layer_norm(ParameterStore& store, const std::string& prefix, Eigen::Index width, ParamGroup group) {
  store.add(prefix + ".gamma", Matrix::Ones(1, width), group);
  store.add(prefix + ".beta", Matrix::Zero(1, width), group);
}

Var layer_norm(Tape& tape, ParameterStore& store, const std::string& prefix, const Var& x) {
  return layer_norm_rows(x, tape.parameter(store.get(prefix + ".gamma")), tape.parameter(store.get(prefix + ".beta")));
}

}  // namespace wsground::nn
