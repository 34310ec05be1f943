#pragma once

// Test-only helpers: independent finite-difference oracles for checking the
// hand-coded derivatives, an IDX writer for round-trip tests, and temp-dir
// plumbing. Nothing here may call the derivative code paths it checks.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "adasdbo/data.hpp"
#include "adasdbo/linalg.hpp"

namespace testsupport {

using adasdbo::Vec;

// Central-difference gradient of a scalar field.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double h = 1e-5) {
  Vec g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Central difference of a vector field along direction d: (F(x+h d) - F(x-h d)) / 2h.
inline Vec fd_directional(const std::function<Vec(const Vec&)>& f, const Vec& x, const Vec& d,
                          double h = 1e-5) {
  Vec xp = x, xm = x;
  adasdbo::axpy(h, d, xp);
  adasdbo::axpy(-h, d, xm);
  Vec fp = f(xp);
  const Vec fm = f(xm);
  for (std::size_t k = 0; k < fp.size(); ++k) fp[k] = (fp[k] - fm[k]) / (2.0 * h);
  return fp;
}

inline double rel_error(const Vec& got, const Vec& want) {
  const double scale = std::max({adasdbo::norm(want), adasdbo::norm(got), 1e-8});
  return adasdbo::norm(adasdbo::sub(got, want)) / scale;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("adasdbo-" + tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

// Writes an IDX image/label pair from raw pixel bytes and labels.
inline void write_idx(const std::string& images_path, const std::string& labels_path,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                      const std::vector<unsigned char>& pixels,
                      const std::vector<unsigned char>& labels) {
  std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
  write_be32(img, 0x00000803);
  write_be32(img, count);
  write_be32(img, rows);
  write_be32(img, cols);
  img.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));

  std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
  write_be32(lab, 0x00000801);
  write_be32(lab, count);
  lab.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

// Small crafted problem instances shared across test files.

inline adasdbo::AgentData single_sample_agent(const Vec& feature, double label) {
  adasdbo::AgentData a;
  a.train.feature_dim = feature.size();
  a.train.features = feature;
  a.train.labels = {label};
  a.validation = a.train;
  a.validation.split = adasdbo::Split::validation;
  return a;
}

inline adasdbo::AgentData empty_agent(std::size_t dim) {
  adasdbo::AgentData a;
  a.train.feature_dim = dim;
  a.validation.feature_dim = dim;
  a.validation.split = adasdbo::Split::validation;
  return a;
}

}  // namespace testsupport
