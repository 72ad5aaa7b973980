#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ouc/spectral_model.hpp"

namespace ouc {

// Minimal structured key-value manifest, a TOML-compatible subset:
//   key = 3.5
//   key = "text"
//   key = true
//   key = [1, 2, 3]          (may span lines)
//   key = [[1, 2], [3, 4]]
//   [section]                (keys below are stored as "section.key")
// '#' starts a comment.
class Manifest {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>,
                             std::vector<std::vector<double>>>;

  static Manifest parse(const std::string& text);
  static Manifest load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  Eigen::VectorXd vector(const std::string& key) const;
  Eigen::MatrixXd matrix(const std::string& key) const;  // rows = outer arrays

  void set(const std::string& key, Value value) {
    if (entries_.find(key) == entries_.end()) order_.push_back(key);
    entries_[key] = std::move(value);
  }
  void set_number(const std::string& key, double v) { set(key, v); }
  void set_text(const std::string& key, std::string v) { set(key, std::move(v)); }
  void set_vector(const std::string& key, const Eigen::VectorXd& v);
  void set_matrix(const std::string& key, const Eigen::MatrixXd& m);

  std::string serialize() const;  // canonical, round-trips through parse
  void save(const std::string& path) const;

 private:
  std::map<std::string, Value> entries_;
  std::vector<std::string> order_;  // serialization order
};

// Model manifest with keys n_modes, mu, sigma_diag, g_diag, control_map,
// beta, a_G, C_G, lambda, p, spatial_dim.
Manifest model_to_manifest(const SpectralModel& model);
SpectralModel model_from_manifest(const Manifest& mf);
SpectralModel load_model(const std::string& path);
void save_model(const SpectralModel& model, const std::string& path);

// FNV-1a hash of the canonical model manifest text, as fixed-width hex.
std::string model_hash(const SpectralModel& model);
std::uint64_t fnv1a(const std::string& text);

// Formats a double with enough digits to round-trip.
std::string format_double(double v);

// Small CSV writer: one header row then data rows.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header)
      : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace ouc
