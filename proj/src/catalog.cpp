#include "edgecache/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgecache/errors.hpp"

namespace edgecache {
namespace {

void check_interval(const Interval& range, const char* name) {
  if (!(range.lo < range.hi) || !std::isfinite(range.lo) ||
      !std::isfinite(range.hi)) {
    throw ConfigError(std::string("degenerate attribute range: ") + name);
  }
}

double draw(const Interval& range, Rng& rng) {
  return range.lo + (range.hi - range.lo) * unit_uniform(rng);
}

}  // namespace

std::vector<double> zipf_probabilities(int files, double eta) {
  if (files < 2) throw ConfigError("catalog needs at least two files");
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ConfigError("zipf exponent must lie in [0, 1]");
  }
  std::vector<double> probs(static_cast<std::size_t>(files));
  double sigma = 0.0;
  for (int f = 1; f <= files; ++f) sigma += std::pow(f, -eta);
  for (int f = 1; f <= files; ++f) {
    probs[static_cast<std::size_t>(f - 1)] = std::pow(f, -eta) / sigma;
  }
  return probs;
}

FileCatalog::FileCatalog(std::vector<FileType> files, double eta,
                         AttributeRanges ranges)
    : files_(std::move(files)), eta_(eta), ranges_(ranges) {
  for (std::size_t k = 0; k < files_.size(); ++k) {
    const FileType& file = files_[k];
    if (file.id != static_cast<int>(k)) throw ConfigError("file ids must be contiguous");
    if (!(file.lifetime > 0.0) || !(file.size > 0.0) ||
        !(file.importance > 0.0 && file.importance < 1.0)) {
      throw ConfigError("file attributes out of range");
    }
  }
  probs_ = zipf_probabilities(size(), eta);
  sigma_ = 0.0;
  for (int f = 1; f <= size(); ++f) sigma_ += std::pow(f, -eta);
  rebuild_cdf();
}

void FileCatalog::set_probabilities(std::vector<double> probs) {
  if (probs.size() != files_.size()) {
    throw ConfigError("probability vector length does not match catalog");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ConfigError("negative request probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("probabilities must sum to 1");
  probs_ = std::move(probs);
  rebuild_cdf();
}

void FileCatalog::rebuild_cdf() {
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

int FileCatalog::sample(Rng& rng) const {
  const double u = unit_uniform(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                            static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<int>(idx);
}

FileCatalog build_catalog(int files, double eta, const AttributeRanges& ranges,
                          std::uint64_t seed) {
  if (files < 2) throw ConfigError("catalog needs at least two files");
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ConfigError("zipf exponent must lie in [0, 1]");
  }
  check_interval(ranges.lifetime, "lifetime");
  check_interval(ranges.importance, "importance");
  check_interval(ranges.size, "size");
  if (ranges.lifetime.lo <= 0.0 || ranges.size.lo <= 0.0 ||
      ranges.importance.lo <= 0.0 || ranges.importance.hi >= 1.0) {
    throw ConfigError("attribute ranges violate positivity or importance bounds");
  }

  Rng rng(seed);
  std::vector<FileType> out;
  out.reserve(static_cast<std::size_t>(files));
  for (int f = 0; f < files; ++f) {
    FileType file;
    file.id = f;
    file.lifetime = draw(ranges.lifetime, rng);
    file.importance = draw(ranges.importance, rng);
    file.size = draw(ranges.size, rng);
    out.push_back(file);
  }
  return FileCatalog(std::move(out), eta, ranges);
}

int sample_request(const FileCatalog& catalog, Rng& rng) {
  return catalog.sample(rng);
}

double sample_interarrival(double rate, Rng& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError("request rate must be positive");
  }
  return -std::log(unit_uniform(rng)) / rate;
}

}  // namespace edgecache
