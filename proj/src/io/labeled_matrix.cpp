#include "wecs/io/labeled_matrix.hpp"

#include <fstream>
#include <sstream>

#include "wecs/error.hpp"
#include "wecs/io/number.hpp"

namespace wecs::io {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '#') return false;
  return true;
}

}  // namespace

void LabeledMatrices::set_meta(const std::string& key, const std::string& value) {
  if (!valid_label(key)) throw DomainError("labeled matrices: invalid meta key '" + key + "'");
  if (value.find('\n') != std::string::npos)
    throw DomainError("labeled matrices: meta value contains a newline");
  for (auto& [k, v] : meta_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta_.emplace_back(key, value);
}

void LabeledMatrices::set_meta(const std::string& key, double value) {
  set_meta(key, format_double(value));
}

void LabeledMatrices::add(const std::string& label, const Eigen::MatrixXd& m) {
  if (!valid_label(label)) throw DomainError("labeled matrices: invalid label '" + label + "'");
  if (has(label)) throw DomainError("labeled matrices: duplicate label '" + label + "'");
  matrices_.emplace_back(label, m);
}

bool LabeledMatrices::has(const std::string& label) const {
  for (const auto& [k, m] : matrices_)
    if (k == label) return true;
  return false;
}

const Eigen::MatrixXd& LabeledMatrices::get(const std::string& label) const {
  for (const auto& [k, m] : matrices_)
    if (k == label) return m;
  throw DomainError("labeled matrices: no matrix '" + label + "'");
}

bool LabeledMatrices::has_meta(const std::string& key) const {
  for (const auto& [k, v] : meta_)
    if (k == key) return true;
  return false;
}

std::string LabeledMatrices::meta(const std::string& key) const {
  for (const auto& [k, v] : meta_)
    if (k == key) return v;
  throw DomainError("labeled matrices: no meta key '" + key + "'");
}

double LabeledMatrices::meta_double(const std::string& key) const {
  double x = 0.0;
  if (!parse_double(meta(key), x))
    throw DomainError("labeled matrices: meta '" + key + "' is not a number");
  return x;
}

std::string LabeledMatrices::to_text() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "meta " + k + " " + v + "\n";
  for (const auto& [label, m] : matrices_) {
    out += "matrix " + label + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) +
           "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out += ' ';
        out += format_double(m(i, j));
      }
      out += '\n';
    }
  }
  return out;
}

void LabeledMatrices::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_text();
  if (!out) throw Error("write failed: " + path.string());
}

LabeledMatrices LabeledMatrices::parse(const std::string& text, const std::string& source) {
  LabeledMatrices out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const auto next_data_line = [&](std::string& l) {
    while (std::getline(in, l)) {
      ++lineno;
      const auto hash = l.find('#');
      if (hash != std::string::npos) l.erase(hash);
      if (l.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  while (next_data_line(line)) {
    const auto tok = split_ws(line);
    if (tok[0] == "meta") {
      if (tok.size() < 3) throw ParseError(source, lineno, "meta needs a key and a value");
      const auto start = line.find(tok[2], line.find(tok[1]) + tok[1].size());
      std::string value = line.substr(start);
      while (!value.empty() && (value.back() == ' ' || value.back() == '\r')) value.pop_back();
      out.set_meta(tok[1], value);
    } else if (tok[0] == "matrix") {
      long long rows = -1, cols = -1;
      try {
        if (tok.size() != 4) throw std::invalid_argument("arity");
        size_t used = 0;
        rows = std::stoll(tok[2], &used);
        if (used != tok[2].size()) throw std::invalid_argument("rows");
        cols = std::stoll(tok[3], &used);
        if (used != tok[3].size()) throw std::invalid_argument("cols");
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "expected 'matrix <label> <rows> <cols>'");
      }
      if (rows < 0 || cols < 0) throw ParseError(source, lineno, "negative matrix dimension");
      if (out.has(tok[1])) throw ParseError(source, lineno, "duplicate matrix '" + tok[1] + "'");
      Eigen::MatrixXd m(rows, cols);
      for (long long i = 0; i < rows; ++i) {
        if (!next_data_line(line))
          throw ParseError(source, lineno, "unexpected end of file in matrix '" + tok[1] + "'");
        const auto vals = split_ws(line);
        if (static_cast<long long>(vals.size()) != cols)
          throw ParseError(source, lineno, "expected " + std::to_string(cols) + " values");
        for (long long j = 0; j < cols; ++j) {
          double x = 0.0;
          if (!parse_double(vals[j], x))
            throw ParseError(source, lineno, "bad number '" + vals[j] + "'");
          m(i, j) = x;
        }
      }
      out.matrices_.emplace_back(tok[1], std::move(m));
    } else {
      throw ParseError(source, lineno, "unknown record '" + tok[0] + "'");
    }
  }
  return out;
}

LabeledMatrices LabeledMatrices::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

}  // namespace wecs::io
