#pragma once

#include <cstdint>
#include <vector>

#include "edgecache/random.hpp"

namespace edgecache {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Ranges the per-file attributes are drawn from.
struct AttributeRanges {
  Interval lifetime{10.0, 30.0};
  Interval importance{0.1, 0.9};
  Interval size{100.0, 1000.0};
};

struct FileType {
  int id = 0;  // 0-based index; exported as id + 1
  double lifetime = 0.0;
  double importance = 0.0;
  double size = 0.0;
};

// Static file attributes plus the request distribution over them. Files are
// stored in popularity-rank order at construction (id 0 is rank 1).
class FileCatalog {
 public:
  FileCatalog(std::vector<FileType> files, double eta, AttributeRanges ranges);

  int size() const { return static_cast<int>(files_.size()); }
  const std::vector<FileType>& files() const { return files_; }
  const FileType& file(int id) const { return files_.at(static_cast<std::size_t>(id)); }
  const std::vector<double>& probabilities() const { return probs_; }
  double eta() const { return eta_; }
  double normalizer() const { return sigma_; }
  const AttributeRanges& ranges() const { return ranges_; }

  // Replaces the request distribution; attributes are untouched.
  void set_probabilities(std::vector<double> probs);

  // Inverse-CDF draw of a file id.
  int sample(Rng& rng) const;

 private:
  void rebuild_cdf();

  std::vector<FileType> files_;
  double eta_;
  double sigma_;
  AttributeRanges ranges_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

// p_f = f^-eta / sum_k k^-eta for f = 1..F.
std::vector<double> zipf_probabilities(int files, double eta);

FileCatalog build_catalog(int files, double eta, const AttributeRanges& ranges,
                          std::uint64_t seed);

int sample_request(const FileCatalog& catalog, Rng& rng);

// Exponential interarrival with mean 1/rate; always strictly positive.
double sample_interarrival(double rate, Rng& rng);

}  // namespace edgecache
