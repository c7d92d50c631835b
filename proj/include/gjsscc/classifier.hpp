#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gjsscc/imaging.hpp"

namespace gjsscc {

/// Probability vector over C classes plus the 1-based target class D.
struct ClassDistribution {
  std::vector<double> probs;
  int target = 1;
  /// Set when an external oracle returned a vector that needed renormalising.
  bool renormalized = false;

  double target_probability() const { return probs.at(static_cast<std::size_t>(target - 1)); }
  int argmax() const;  ///< 1-based
};

/// Anything that maps an image to class probabilities.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual ClassDistribution classify(const Image& img, int target) = 0;
  virtual int class_count() const = 0;
  /// True when classify may be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

/// Nearest-template classifier: softmax over classes of -beta * MSE(img, template).
class PrototypeModel final : public Oracle {
 public:
  PrototypeModel(std::vector<Image> templates, double beta);

  /// JSON: {"beta": <double>, "templates": ["a.pgm", ...]}, paths relative to the file.
  static PrototypeModel load(const std::filesystem::path& model_file);

  ClassDistribution classify(const Image& img, int target) override;
  int class_count() const override { return static_cast<int>(templates_.size()); }
  bool concurrent() const override { return true; }

  /// Per-class logits -beta * MSE.
  std::vector<double> logits(const Image& img) const;

  const std::vector<Image>& templates() const noexcept { return templates_; }
  double beta() const noexcept { return beta_; }

 private:
  std::vector<Image> templates_;
  double beta_;
};

std::vector<double> softmax(const std::vector<double>& logits);

/// Parses one response line of the stdio protocol into a distribution.
/// Accepts "OK p1 ... pC"; throws OracleError for "ERR ..." and malformed lines.
ClassDistribution parse_oracle_response(std::string_view line, int expected_classes, int target);

/// Classifier running in a child process, spoken to over stdin/stdout:
///   <- READY <C>
///   -> CLASSIFY <absolute-path> <D>
///   <- OK <p1> ... <pC>   |   ERR <message>
/// Requests are serialised; images are written to a private temp directory.
class ExternalOracle final : public Oracle {
 public:
  explicit ExternalOracle(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalOracle() override;
  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  ClassDistribution classify(const Image& img, int target) override;
  int class_count() const override { return classes_; }

 private:
  std::string read_line();
  void shutdown() noexcept;
  void write_line(const std::string& line);

  std::string command_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  int classes_ = 0;
  std::string buffer_;
  std::filesystem::path scratch_;
  std::uint64_t counter_ = 0;
};

/// Builds an oracle from "builtin:<model.json>" or "external:<command>".
std::unique_ptr<Oracle> make_oracle(std::string_view spec, std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace gjsscc
