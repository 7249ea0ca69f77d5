#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/parameters.hpp"
#include "nn/tape.hpp"

namespace wsground::nn {

// y = x W + b with W: in x out, b: 1 x out, stored as <prefix>.weight / <prefix>.bias.
void add_linear(ParameterStore& store, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                ParamGroup group, std::uint64_t seed);
Var linear(Tape& tape, ParameterStore& store, const std::string& prefix, const Var& x);

/// Stack of linear layers, ReLU after every layer (shared point-wise MLP).
void add_mlp(ParameterStore& store, const std::string& prefix, Eigen::Index in, const std::vector<int>& widths,
             ParamGroup group, std::uint64_t seed);
Var mlp_relu(Tape& tape, ParameterStore& store, const std::string& prefix, const Var& x, std::size_t layers);

void add_layer_norm(ParameterStore& store, const std::string& prefix, Eigen::Index width, ParamGroup group);
Var layer_norm(Tape& tape, ParameterStore& store, const std::string& prefix, const Var& x);

}  // namespace wsground::nn
