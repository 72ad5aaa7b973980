#include "ouc/manifest.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ouc {

namespace {

void skip_ws(const std::string& s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' ||
                          s[i] == '\n'))
    ++i;
}

void skip_ws_and_comments(const std::string& s, std::size_t& i) {
  for (;;) {
    skip_ws(s, i);
    if (i < s.size() && s[i] == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    return;
  }
}

double parse_number(const std::string& s, std::size_t& i) {
  std::size_t consumed = 0;
  const double v = std::stod(s.substr(i), &consumed);
  i += consumed;
  return v;
}

Manifest::Value parse_value(const std::string& s, std::size_t& i);

std::vector<double> parse_flat_array(const std::string& s, std::size_t& i) {
  std::vector<double> out;
  for (;;) {
    skip_ws_and_comments(s, i);
    if (i >= s.size()) throw std::invalid_argument("manifest: unterminated array");
    if (s[i] == ']') {
      ++i;
      return out;
    }
    out.push_back(parse_number(s, i));
    skip_ws_and_comments(s, i);
    if (i < s.size() && s[i] == ',') ++i;
  }
}

Manifest::Value parse_array(const std::string& s, std::size_t& i) {
  // '[' already consumed; decide flat vs nested.
  skip_ws_and_comments(s, i);
  if (i < s.size() && s[i] == '[') {
    std::vector<std::vector<double>> rows;
    for (;;) {
      skip_ws_and_comments(s, i);
      if (i >= s.size())
        throw std::invalid_argument("manifest: unterminated nested array");
      if (s[i] == ']') {
        ++i;
        return rows;
      }
      if (s[i] != '[')
        throw std::invalid_argument("manifest: expected nested array row");
      ++i;
      rows.push_back(parse_flat_array(s, i));
      skip_ws_and_comments(s, i);
      if (i < s.size() && s[i] == ',') ++i;
    }
  }
  return parse_flat_array(s, i);
}

Manifest::Value parse_value(const std::string& s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) throw std::invalid_argument("manifest: missing value");
  const char c = s[i];
  if (c == '"') {
    ++i;
    std::string out;
    while (i < s.size() && s[i] != '"') out.push_back(s[i++]);
    if (i >= s.size()) throw std::invalid_argument("manifest: open string");
    ++i;
    return out;
  }
  if (c == '[') {
    ++i;
    return parse_array(s, i);
  }
  if (s.compare(i, 4, "true") == 0 &&
      (i + 4 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 4])))) {
    i += 4;
    return true;
  }
  if (s.compare(i, 5, "false") == 0 &&
      (i + 5 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 5])))) {
    i += 5;
    return false;
  }
  return parse_number(s, i);
}

}  // namespace

Manifest Manifest::parse(const std::string& text) {
  Manifest mf;
  std::size_t i = 0;
  std::string section;
  while (i < text.size()) {
    skip_ws_and_comments(text, i);
    if (i >= text.size()) break;
    if (text[i] == '[') {
      // Section header: [name]
      const std::size_t close = text.find(']', i);
      if (close == std::string::npos)
        throw std::invalid_argument("manifest: unterminated section header");
      section = text.substr(i + 1, close - i - 1);
      i = close + 1;
      continue;
    }
    std::string key;
    while (i < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[i])) ||
            text[i] == '_' || text[i] == '.' || text[i] == '-'))
      key.push_back(text[i++]);
    if (key.empty())
      throw std::invalid_argument("manifest: expected a key");
    skip_ws(text, i);
    if (i >= text.size() || text[i] != '=')
      throw std::invalid_argument("manifest: expected '=' after key '" + key +
                                  "'");
    ++i;
    const std::string full = section.empty() ? key : section + "." + key;
    mf.set(full, parse_value(text, i));
  }
  return mf;
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

double Manifest::number(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument("manifest: missing key '" + key + "'");
  if (const double* v = std::get_if<double>(&it->second)) return *v;
  throw std::invalid_argument("manifest: key '" + key + "' is not a number");
}

double Manifest::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

bool Manifest::boolean_or(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (const bool* v = std::get_if<bool>(&it->second)) return *v;
  throw std::invalid_argument("manifest: key '" + key + "' is not a boolean");
}

std::string Manifest::text(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument("manifest: missing key '" + key + "'");
  if (const std::string* v = std::get_if<std::string>(&it->second)) return *v;
  throw std::invalid_argument("manifest: key '" + key + "' is not a string");
}

std::string Manifest::text_or(const std::string& key,
                              const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

Eigen::VectorXd Manifest::vector(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument("manifest: missing key '" + key + "'");
  if (const auto* v = std::get_if<std::vector<double>>(&it->second)) {
    Eigen::VectorXd out(v->size());
    for (std::size_t i = 0; i < v->size(); ++i) out[i] = (*v)[i];
    return out;
  }
  throw std::invalid_argument("manifest: key '" + key + "' is not an array");
}

Eigen::MatrixXd Manifest::matrix(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw std::invalid_argument("manifest: missing key '" + key + "'");
  if (const auto* rows =
          std::get_if<std::vector<std::vector<double>>>(&it->second)) {
    if (rows->empty()) return Eigen::MatrixXd(0, 0);
    const std::size_t cols = (*rows)[0].size();
    Eigen::MatrixXd out(rows->size(), cols);
    for (std::size_t r = 0; r < rows->size(); ++r) {
      if ((*rows)[r].size() != cols)
        throw std::invalid_argument("manifest: ragged matrix '" + key + "'");
      for (std::size_t c = 0; c < cols; ++c) out(r, c) = (*rows)[r][c];
    }
    return out;
  }
  throw std::invalid_argument("manifest: key '" + key + "' is not a matrix");
}

void Manifest::set_vector(const std::string& key, const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  set(key, std::move(out));
}

void Manifest::set_matrix(const std::string& key, const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows[r].resize(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  }
  set(key, std::move(rows));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Manifest::serialize() const {
  std::ostringstream out;
  for (const std::string& key : order_) {
    const Value& val = entries_.at(key);
    out << key << " = ";
    if (const double* d = std::get_if<double>(&val)) {
      out << format_double(*d);
    } else if (const bool* b = std::get_if<bool>(&val)) {
      out << (*b ? "true" : "false");
    } else if (const std::string* s = std::get_if<std::string>(&val)) {
      out << '"' << *s << '"';
    } else if (const auto* a = std::get_if<std::vector<double>>(&val)) {
      out << '[';
      for (std::size_t i = 0; i < a->size(); ++i)
        out << (i ? ", " : "") << format_double((*a)[i]);
      out << ']';
    } else if (const auto* m =
                   std::get_if<std::vector<std::vector<double>>>(&val)) {
      out << '[';
      for (std::size_t r = 0; r < m->size(); ++r) {
        out << (r ? ", [" : "[");
        for (std::size_t c = 0; c < (*m)[r].size(); ++c)
          out << (c ? ", " : "") << format_double((*m)[r][c]);
        out << ']';
      }
      out << ']';
    }
    out << '\n';
  }
  return out.str();
}

void Manifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  out << serialize();
}

Manifest model_to_manifest(const SpectralModel& model) {
  Manifest mf;
  mf.set_number("n_modes", model.n_modes());
  mf.set_vector("mu", model.mu);
  mf.set_vector("sigma_diag", model.sigma_diag);
  mf.set_vector("g_diag", model.g_diag);
  mf.set_matrix("control_map", model.control_map);
  mf.set_number("beta", model.beta);
  mf.set_number("a_G", model.a_g);
  mf.set_number("C_G", model.c_g);
  mf.set_number("lambda", model.lambda);
  mf.set_number("p", model.p);
  mf.set_number("spatial_dim", model.spatial_dim);
  return mf;
}

SpectralModel model_from_manifest(const Manifest& mf) {
  const int n = static_cast<int>(mf.number("n_modes"));
  Eigen::VectorXd mu = mf.vector("mu");
  if (mu.size() != n)
    throw std::invalid_argument("model manifest: n_modes does not match mu");
  return build_model(std::move(mu), mf.vector("sigma_diag"),
                     mf.vector("g_diag"), mf.matrix("control_map"),
                     mf.number("beta"), mf.number("a_G"), mf.number("C_G"),
                     mf.number("lambda"), mf.number("p"),
                     static_cast<int>(mf.number("spatial_dim")));
}

SpectralModel load_model(const std::string& path) {
  return model_from_manifest(Manifest::load(path));
}

void save_model(const SpectralModel& model, const std::string& path) {
  model_to_manifest(model).save(path);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string model_hash(const SpectralModel& model) {
  const std::uint64_t h = fnv1a(model_to_manifest(model).serialize());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void CsvWriter::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("csv: row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i)
    out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

void CsvWriter::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  out << str();
}

}  // namespace ouc
