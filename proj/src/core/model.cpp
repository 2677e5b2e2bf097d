#include "core/model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace iso {

using nlohmann::json;

const std::array<const char*, FeatureConfig::group_count> FeatureConfig::group_names = {
    "unary", "distance", "adjacency", "scaled_distance", "angle"};

LossKind parse_loss_kind(const std::string& name) {
  if (name == "hamming") return LossKind::hamming;
  if (name == "endpoint") return LossKind::endpoint;
  fail(ErrorCode::invalid, "unknown loss '" + name + "' (expected hamming or endpoint)");
}

const char* loss_kind_name(LossKind kind) {
  return kind == LossKind::hamming ? "hamming" : "endpoint";
}

std::size_t FeatureConfig::active_groups() const {
  std::size_t n = 0;
  for (bool f : flags()) n += f ? 1 : 0;
  return n;
}

void WeightModel::validate() const {
  const std::size_t groups = config.active_groups();
  if (groups == 0) fail(ErrorCode::invalid, "model has no active feature groups");
  if (theta.size() != groups)
    fail(ErrorCode::dimension, "model theta has dimension " + std::to_string(theta.size()) +
                                   " but the feature configuration activates " +
                                   std::to_string(groups) + " groups");
  if (scale_factors.size() != groups)
    fail(ErrorCode::dimension, "model scale_factors has dimension " +
                                   std::to_string(scale_factors.size()) + ", expected " +
                                   std::to_string(groups));
  if (config.unary && theta0.empty())
    fail(ErrorCode::dimension, "unary group is active but theta0 is empty");
  for (double v : theta0)
    if (!std::isfinite(v)) fail(ErrorCode::invalid, "model theta0 has a non-finite entry");
  for (double v : theta)
    if (!std::isfinite(v)) fail(ErrorCode::invalid, "model theta has a non-finite entry");
  for (double v : scale_factors)
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::invalid, "model scale factors must be positive and finite");
  if (p < 1) fail(ErrorCode::invalid, "model candidate count p must be at least 1");
  if (!std::isfinite(degenerate_penalty) || degenerate_penalty <= 0.0)
    fail(ErrorCode::invalid, "degenerate penalty must be positive and finite");
}

WeightModel default_model(std::size_t descriptor_dim, int p, const FeatureConfig& config) {
  WeightModel m;
  m.config = config;
  m.p = p;
  m.theta0.assign(config.unary ? descriptor_dim : 0, 1.0);
  m.theta.assign(config.active_groups(), 1.0);
  m.scale_factors.assign(config.active_groups(), 1.0);
  m.validate();
  return m;
}

static constexpr int kModelVersion = 1;

void save_model(const WeightModel& model, const std::string& path) {
  model.validate();
  json j;
  j["version"] = kModelVersion;
  j["theta0"] = model.theta0;
  j["theta"] = model.theta;
  j["p"] = model.p;
  j["feature_config"] = {{"unary", model.config.unary},
                         {"distance", model.config.distance},
                         {"adjacency", model.config.adjacency},
                         {"scaled_distance", model.config.scaled_distance},
                         {"angle", model.config.angle}};
  j["scale_factors"] = model.scale_factors;
  j["degenerate_penalty"] = model.degenerate_penalty;
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::io, "failed writing model to '" + path + "'");
}

WeightModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, "model file '" + path + "': " + e.what());
  }
  try {
    if (!j.contains("version") || !j["version"].is_number_integer())
      fail(ErrorCode::parse, "model file '" + path + "' lacks an integer version field");
    if (j["version"].get<int>() != kModelVersion)
      fail(ErrorCode::unsupported, "model file '" + path + "' has version " +
                                       j["version"].dump() + ", this build reads version " +
                                       std::to_string(kModelVersion));
    WeightModel m;
    m.theta0 = j.at("theta0").get<std::vector<double>>();
    m.theta = j.at("theta").get<std::vector<double>>();
    m.p = j.at("p").get<int>();
    const json& fc = j.at("feature_config");
    m.config.unary = fc.at("unary").get<bool>();
    m.config.distance = fc.at("distance").get<bool>();
    m.config.adjacency = fc.at("adjacency").get<bool>();
    m.config.scaled_distance = fc.at("scaled_distance").get<bool>();
    m.config.angle = fc.at("angle").get<bool>();
    m.scale_factors = j.at("scale_factors").get<std::vector<double>>();
    if (j.contains("degenerate_penalty"))
      m.degenerate_penalty = j["degenerate_penalty"].get<double>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, "model file '" + path + "': " + e.what());
  }
}

} // namespace iso
