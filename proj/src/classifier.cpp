#include "gjsscc/classifier.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gjsscc/error.hpp"

namespace gjsscc {

int ClassDistribution::argmax() const {
  if (probs.empty()) throw DomainError("argmax of empty distribution");
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()) + 1;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

PrototypeModel::PrototypeModel(std::vector<Image> templates, double beta)
    : templates_(std::move(templates)), beta_(beta) {
  if (templates_.empty()) throw DomainError("prototype model: no templates");
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) throw DomainError("prototype model: beta must be positive");
  const auto& first = templates_.front();
  for (const auto& t : templates_) {
    if (t.width() != first.width() || t.height() != first.height() || t.channels() != first.channels()) {
      throw DomainError("prototype model: templates differ in dimensions");
    }
  }
}

PrototypeModel PrototypeModel::load(const std::filesystem::path& model_file) {
  std::ifstream in(model_file);
  if (!in) throw ConfigError("cannot open model file: " + model_file.string());
  nlohmann::json j;
  try {
    in >> j;
    std::vector<Image> templates;
    for (const auto& p : j.at("templates")) {
      std::filesystem::path tp = p.get<std::string>();
      if (tp.is_relative()) tp = model_file.parent_path() / tp;
      templates.push_back(load_raster(tp));
    }
    return PrototypeModel(std::move(templates), j.at("beta").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("model file " + model_file.string() + ": " + e.what());
  }
}

std::vector<double> PrototypeModel::logits(const Image& img) const {
  const auto& first = templates_.front();
  if (img.width() != first.width() || img.height() != first.height() || img.channels() != first.channels()) {
    throw OracleError("prototype model: input resolution " + std::to_string(img.width()) + "x" +
                      std::to_string(img.height()) + " does not match templates");
  }
  const auto n = static_cast<double>(img.samples().size());
  std::vector<double> out;
  out.reserve(templates_.size());
  for (const auto& t : templates_) {
    double sse = 0.0;
    const auto a = img.samples();
    const auto b = t.samples();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
      sse += d * d;
    }
    out.push_back(-beta_ * sse / n);
  }
  return out;
}

ClassDistribution PrototypeModel::classify(const Image& img, int target) {
  if (target < 1 || target > class_count()) throw DomainError("classify: target class out of range");
  return {softmax(logits(img)), target, false};
}

ClassDistribution parse_oracle_response(std::string_view line, int expected_classes, int target) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.starts_with("ERR")) {
    std::string_view msg = line.substr(3);
    if (!msg.empty() && msg.front() == ' ') msg.remove_prefix(1);
    throw OracleError("oracle error: " + std::string(msg));
  }
  if (!line.starts_with("OK ")) throw OracleError("malformed oracle response: '" + std::string(line) + "'");

  ClassDistribution d;
  d.target = target;
  std::string_view rest = line.substr(3);
  while (!rest.empty()) {
    const auto sp = rest.find(' ');
    const std::string_view tok = rest.substr(0, sp);
    rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    if (tok.empty()) throw OracleError("malformed oracle response: empty field");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw OracleError("malformed oracle response: bad probability '" + std::string(tok) + "'");
    }
    d.probs.push_back(v);
  }
  if (d.probs.empty()) throw OracleError("malformed oracle response: no probabilities");
  if (expected_classes > 0 && static_cast<int>(d.probs.size()) != expected_classes) {
    throw OracleError("oracle returned " + std::to_string(d.probs.size()) + " probabilities, expected " +
                      std::to_string(expected_classes));
  }
  if (target < 1 || target > static_cast<int>(d.probs.size())) throw DomainError("classify: target class out of range");

  const double sum = std::accumulate(d.probs.begin(), d.probs.end(), 0.0);
  const double deviation = std::abs(sum - 1.0);
  if (deviation > 1e-6) throw OracleError("oracle returned non-normalized probabilities (sum " + std::to_string(sum) + ")");
  if (deviation > 1e-9) {
    for (auto& p : d.probs) p /= sum;
    d.renormalized = true;
  }
  return d;
}

std::unique_ptr<Oracle> make_oracle(std::string_view spec, std::chrono::milliseconds timeout) {
  if (spec.starts_with("builtin:")) {
    return std::make_unique<PrototypeModel>(PrototypeModel::load(std::string(spec.substr(8))));
  }
  if (spec.starts_with("external:")) {
    return std::make_unique<ExternalOracle>(std::string(spec.substr(9)), timeout);
  }
  throw ConfigError("oracle must be 'builtin:<model-file>' or 'external:<command>', got '" + std::string(spec) + "'");
}

}  // namespace gjsscc
