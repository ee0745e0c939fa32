#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace wecs::io {

/// Plain-text bundle of named matrices plus string metadata:
///
///   # comment
///   meta gamma 1.19
///   matrix A 2 2
///   -1 0
///   0 -2
///
/// Rows are written one per line with round-trip precision.
class LabeledMatrices {
 public:
  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value);
  void add(const std::string& label, const Eigen::MatrixXd& m);

  bool has(const std::string& label) const;
  const Eigen::MatrixXd& get(const std::string& label) const;
  std::string meta(const std::string& key) const;
  double meta_double(const std::string& key) const;
  bool has_meta(const std::string& key) const;

  const std::vector<std::pair<std::string, Eigen::MatrixXd>>& matrices() const {
    return matrices_;
  }

  std::string to_text() const;
  void save(const std::filesystem::path& path) const;
  static LabeledMatrices parse(const std::string& text, const std::string& source = "<string>");
  static LabeledMatrices load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> matrices_;
};

}  // namespace wecs::io
