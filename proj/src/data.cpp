#include "adasdbo/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "adasdbo/errors.hpp"

namespace adasdbo {

void Dataset::validate() const {
  if (feature_dim == 0 && !features.empty())
    throw std::invalid_argument("dataset: features present but feature_dim == 0");
  if (feature_dim != 0 && features.size() % feature_dim != 0)
    throw std::invalid_argument("dataset: feature buffer not a multiple of feature_dim");
  const std::size_t n = size();
  if (categorical()) {
    if (class_labels.size() != n)
      throw std::invalid_argument("dataset: class label count != sample count");
    for (int c : class_labels)
      if (c < 0 || c >= num_classes)
        throw std::invalid_argument("dataset: class label out of [0, num_classes)");
  } else {
    if (labels.size() != n)
      throw std::invalid_argument("dataset: label count != sample count");
  }
}

SyntheticDataset generate_synthetic(std::size_t n_agents, std::size_t feature_dim,
                                    std::size_t train_per_agent, std::size_t val_per_agent,
                                    double heterogeneity, const RngSpec& rng) {
  if (n_agents == 0 || feature_dim == 0)
    throw std::invalid_argument("generate_synthetic: agent count and feature_dim must be positive");
  if (train_per_agent == 0 || val_per_agent == 0)
    throw std::invalid_argument("generate_synthetic: sample counts must be positive");
  if (!(heterogeneity > 0.0))
    throw std::invalid_argument("generate_synthetic: heterogeneity must be positive");

  SyntheticDataset out;
  out.heterogeneity = heterogeneity;

  Rng wrng = rng.make("ground-truth");
  out.ground_truth.resize(feature_dim);
  for (double& w : out.ground_truth) w = wrng.normal();

  auto make_split = [&](std::size_t agent, std::size_t count, Split split,
                        std::string_view tag) {
    Rng r = rng.make("agent-" + std::to_string(agent) + "/" + std::string(tag));
    // Agent indices are 1-based in the feature scale so agent 0 does not
    // degenerate to zero variance.
    const double sigma = static_cast<double>(agent + 1) * heterogeneity;
    Dataset d;
    d.feature_dim = feature_dim;
    d.split = split;
    d.features.resize(count * feature_dim);
    d.labels.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
      double signal = 0.0;
      for (std::size_t k = 0; k < feature_dim; ++k) {
        const double x = sigma * r.normal();
        d.features[s * feature_dim + k] = x;
        signal += x * out.ground_truth[k];
      }
      d.labels[s] = signal + 0.1 * r.normal();
    }
    return d;
  };

  out.agents.reserve(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) {
    AgentData a;
    a.train = make_split(i, train_per_agent, Split::train, "train");
    a.validation = make_split(i, val_per_agent, Split::validation, "val");
    out.agents.push_back(std::move(a));
  }
  return out;
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::ifstream& in, const std::string& path, std::size_t offset) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw ParseError(path + ": truncated header at byte " + std::to_string(offset));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + images_path);
  const std::uint32_t img_magic = read_be32(img, images_path, 0);
  if (img_magic != kImagesMagic)
    throw ParseError(images_path + ": bad magic at byte 0 (got 0x" +
                     [&] { char buf[16]; std::snprintf(buf, sizeof buf, "%08x", img_magic); return std::string(buf); }() +
                     ", want 0x00000803)");
  const std::uint32_t count = read_be32(img, images_path, 4);
  const std::uint32_t rows = read_be32(img, images_path, 8);
  const std::uint32_t cols = read_be32(img, images_path, 12);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot open " + labels_path);
  const std::uint32_t lab_magic = read_be32(lab, labels_path, 0);
  if (lab_magic != kLabelsMagic)
    throw ParseError(labels_path + ": bad magic at byte 0 (got 0x" +
                     [&] { char buf[16]; std::snprintf(buf, sizeof buf, "%08x", lab_magic); return std::string(buf); }() +
                     ", want 0x00000801)");
  const std::uint32_t lab_count = read_be32(lab, labels_path, 4);
  if (lab_count != count)
    throw ParseError(labels_path + ": label count " + std::to_string(lab_count) +
                     " != image count " + std::to_string(count));

  const std::size_t dim = std::size_t(rows) * cols;
  Dataset d;
  d.feature_dim = dim;
  d.features.resize(std::size_t(count) * dim);
  d.class_labels.resize(count);

  std::vector<unsigned char> pixel_buf(dim);
  for (std::uint32_t s = 0; s < count; ++s) {
    if (!img.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(dim)))
      throw ParseError(images_path + ": truncated payload at byte " +
                       std::to_string(16 + std::size_t(s) * dim));
    for (std::size_t k = 0; k < dim; ++k)
      d.features[std::size_t(s) * dim + k] = pixel_buf[k] / 255.0;
    unsigned char lbl;
    if (!lab.read(reinterpret_cast<char*>(&lbl), 1))
      throw ParseError(labels_path + ": truncated payload at byte " + std::to_string(8 + s));
    d.class_labels[s] = lbl;
  }
  d.num_classes = 0;
  for (int c : d.class_labels) d.num_classes = std::max(d.num_classes, c + 1);
  if (count > 0 && d.num_classes == 0) d.num_classes = 1;
  if (count == 0) d.num_classes = 1;  // empty but categorical
  d.validate();
  return d;
}

namespace {

Dataset take_rows(const Dataset& src, const std::vector<std::size_t>& idx) {
  Dataset d;
  d.feature_dim = src.feature_dim;
  d.num_classes = src.num_classes;
  d.split = src.split;
  d.features.reserve(idx.size() * src.feature_dim);
  for (std::size_t i : idx) {
    const auto r = src.row(i);
    d.features.insert(d.features.end(), r.begin(), r.end());
    if (src.categorical())
      d.class_labels.push_back(src.class_labels[i]);
    else
      d.labels.push_back(src.labels[i]);
  }
  return d;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace

std::vector<Dataset> partition(const Dataset& data, std::size_t n, PartitionPolicy policy,
                               double skew_fraction, Rng& rng) {
  data.validate();
  const std::size_t total = data.size();
  if (n == 0 || n > total) throw std::invalid_argument("partition: need 0 < n <= sample count");

  std::vector<std::vector<std::size_t>> shard_idx(n);

  if (policy == PartitionPolicy::equal) {
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    const std::size_t base = total / n, extra = total % n;
    std::size_t pos = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t len = base + (s < extra ? 1 : 0);
      shard_idx[s].assign(order.begin() + pos, order.begin() + pos + len);
      pos += len;
    }
  } else {
    if (!(skew_fraction > 0.0 && skew_fraction <= 1.0))
      throw std::invalid_argument("partition: skew fraction must lie in (0,1]");
    if (!data.categorical())
      throw std::invalid_argument("partition: by_class_skew needs class labels");
    std::vector<std::vector<std::size_t>> by_class(data.num_classes);
    for (std::size_t i = 0; i < total; ++i) by_class[data.class_labels[i]].push_back(i);
    std::size_t spread_cursor = 0;
    for (int c = 0; c < data.num_classes; ++c) {
      auto& members = by_class[c];
      shuffle(members, rng);
      const std::size_t keep = static_cast<std::size_t>(skew_fraction * members.size());
      const std::size_t home = static_cast<std::size_t>(c) % n;
      for (std::size_t k = 0; k < members.size(); ++k) {
        if (k < keep) {
          shard_idx[home].push_back(members[k]);
        } else {
          shard_idx[spread_cursor % n].push_back(members[k]);
          ++spread_cursor;
        }
      }
    }
  }

  std::vector<Dataset> shards;
  shards.reserve(n);
  for (const auto& idx : shard_idx) shards.push_back(take_rows(data, idx));
  return shards;
}

void export_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[40];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    for (double v : row) {
      put(v);
      out << ',';
    }
    if (data.categorical())
      out << data.class_labels[i];
    else
      put(data.labels[i]);
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed on " + path);
}

}  // namespace adasdbo
