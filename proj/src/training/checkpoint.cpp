#include "training/checkpoint.hpp"

#include <array>
#include <fstream>

#include <json.hpp>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/version.hpp"
#include "training/config.hpp"

namespace wsground {

namespace {
constexpr std::array<char, 4> kMagic = {'W', 'S', 'G', 'C'};
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void write_checkpoint(const std::filesystem::path& path, const GroundingModel& model, const CheckpointMeta& meta) {
  const auto& params = model.params();
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    tensors.push_back({{"name", p.name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"group", p.group == nn::ParamGroup::transformer ? "transformer" : "base"}});
  }
  const auto& cfg = model.config();
  const nlohmann::json header = {
      {"model", to_json(cfg)},
      {"labels", model.vocabulary().labels},
      {"alpha", {{"text", cfg.alpha_text}, {"image", cfg.alpha_image}, {"point", cfg.alpha_point}}},
      {"d", model.dim()},
      {"K", model.num_categories()},
      {"config_hash", meta.config_hash},
      {"seed", meta.seed},
      {"epoch", meta.epoch},
      {"extension_mode", meta.extension_mode},
      {"version", kVersion},
      {"tensors", tensors}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  binary::put<std::uint32_t>(out, kFormatVersion);
  binary::put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& v = params[i].value;
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      for (Eigen::Index c = 0; c < v.cols(); ++c) binary::put<double>(out, v(r, c));
  }
  if (!out) throw LoadError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing checkpoint " + path.string());
  const std::string what = "checkpoint " + path.string();
  std::array<char, 4> magic{};
  binary::get_bytes(in, magic.data(), magic.size(), what);
  if (magic != kMagic) throw LoadError("not a checkpoint: " + path.string());
  if (binary::get<std::uint32_t>(in, what) != kFormatVersion)
    throw LoadError("unsupported checkpoint version in " + path.string());
  const auto len = binary::get<std::uint64_t>(in, what);
  if (len > (1u << 26)) throw LoadError("implausible header length in " + path.string());
  std::string text(len, '\0');
  binary::get_bytes(in, text.data(), len, what);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw LoadError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  try {
    ModelConfig cfg;
    try {
      cfg = model_config_from_json(header.at("model"));
    } catch (const ConfigError& e) {
      throw LoadError(std::string("checkpoint model config: ") + e.what());
    }
    CategoryVocabulary vocab{header.at("labels").get<std::vector<std::string>>()};
    if (header.at("d").get<int>() != cfg.encoder.d || header.at("K").get<int>() != vocab.size())
      throw LoadError("checkpoint header d/K disagree with its config");

    nn::ParameterStore params;
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      if (rows < 0 || cols < 0 || rows * cols > (1 << 26)) throw LoadError("implausible tensor shape in " + what);
      nn::Matrix m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = binary::get<double>(in, what);
      const auto group = t.at("group").get<std::string>() == "transformer" ? nn::ParamGroup::transformer
                                                                           : nn::ParamGroup::base;
      params.add(t.at("name").get<std::string>(), std::move(m), group);
    }
    CheckpointMeta meta{header.at("config_hash").get<std::string>(), header.at("seed").get<std::uint64_t>(),
                        header.at("epoch").get<int>(), header.value("extension_mode", std::string("boundary_extended"))};
    return {GroundingModel(std::move(cfg), std::move(vocab), std::move(params)), std::move(meta)};
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
}

}  // namespace wsground
