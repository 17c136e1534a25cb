#include "edgecache/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "edgecache/errors.hpp"

namespace edgecache {

double freshness(double t, const CacheEntry& entry, double lifetime) {
  if (t < entry.generated_at) {
    throw std::logic_error("freshness queried before the file was generated");
  }
  if (!(lifetime > 0.0)) throw std::logic_error("lifetime must be positive");
  return std::clamp((t - entry.generated_at) / lifetime, 0.0, 1.0);
}

double utility(double h, double importance) {
  if (!(h >= 0.0 && h <= 1.0)) throw std::logic_error("freshness outside [0, 1]");
  if (!(importance > 0.0 && importance < 1.0)) {
    throw std::logic_error("importance outside (0, 1)");
  }
  return importance * std::expm1(1.0 - h) / (std::numbers::e - 1.0);
}

CacheState::CacheState(double capacity, int files)
    : capacity_(capacity), entries_(static_cast<std::size_t>(files)) {
  if (!(capacity > 0.0)) throw ConfigError("cache capacity must be positive");
}

std::size_t CacheState::occupancy() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const auto& e) { return e.has_value(); }));
}

std::vector<double> CacheState::indicator() const {
  std::vector<double> b(entries_.size(), 0.0);
  for (std::size_t f = 0; f < entries_.size(); ++f) b[f] = entries_[f] ? 1.0 : 0.0;
  return b;
}

void CacheState::insert(const CacheEntry& entry, double size) {
  auto& slot = entries_.at(static_cast<std::size_t>(entry.file));
  if (slot) throw std::logic_error("file already cached");
  if (used_ + size > capacity_ * (1.0 + 1e-12)) {
    throw std::logic_error("insertion exceeds cache capacity");
  }
  slot = entry;
  used_ += size;
}

void CacheState::erase(int file, double size) {
  auto& slot = entries_.at(static_cast<std::size_t>(file));
  if (!slot) throw std::logic_error("file not cached");
  slot.reset();
  used_ -= size;
  if (occupancy() == 0) used_ = 0.0;  // drop accumulated rounding
}

std::vector<int> purge_expired(CacheState& cache, const FileCatalog& catalog,
                               double t) {
  std::vector<int> evicted;
  for (int f = 0; f < cache.files(); ++f) {
    const auto& entry = cache.entry(f);
    if (!entry) continue;
    const FileType& file = catalog.file(f);
    if (freshness(t, *entry, file.lifetime) >= 1.0) {
      cache.erase(f, file.size);
      evicted.push_back(f);
    }
  }
  return evicted;
}

std::vector<double> utilities(const CacheState& cache, const FileCatalog& catalog,
                              double t) {
  std::vector<double> y(static_cast<std::size_t>(cache.files()), 0.0);
  for (int f = 0; f < cache.files(); ++f) {
    const auto& entry = cache.entry(f);
    if (!entry) continue;
    const FileType& file = catalog.file(f);
    y[static_cast<std::size_t>(f)] =
        utility(freshness(t, *entry, file.lifetime), file.importance);
  }
  return y;
}

std::vector<double> popularity_counts(std::span<const int> history, int window,
                                      int files) {
  if (window <= 0) throw ConfigError("popularity window must be positive");
  std::vector<double> d(static_cast<std::size_t>(files), 0.0);
  const std::size_t take = std::min(history.size(), static_cast<std::size_t>(window));
  for (std::size_t k = history.size() - take; k < history.size(); ++k) {
    d.at(static_cast<std::size_t>(history[k])) += 1.0;
  }
  for (double& v : d) v /= window;
  return d;
}

PopularityWindow::PopularityWindow(int window, int files)
    : window_(window), counts_(static_cast<std::size_t>(files), 0) {
  if (window <= 0) throw ConfigError("popularity window must be positive");
}

void PopularityWindow::push(int file) {
  recent_.push_back(file);
  ++counts_.at(static_cast<std::size_t>(file));
  if (recent_.size() > static_cast<std::size_t>(window_)) {
    --counts_[static_cast<std::size_t>(recent_.front())];
    recent_.pop_front();
  }
}

std::vector<double> PopularityWindow::normalized() const {
  std::vector<double> d(counts_.size());
  for (std::size_t f = 0; f < counts_.size(); ++f) {
    d[f] = static_cast<double>(counts_[f]) / window_;
  }
  return d;
}

double reward(std::span<const double> cached, std::span<const double> popularity,
              std::span<const double> utility, double free_fraction,
              const RewardWeights& weights) {
  if (cached.size() != popularity.size() || cached.size() != utility.size()) {
    throw std::logic_error("reward inputs differ in length");
  }
  double gain = 0.0;
  for (std::size_t f = 0; f < cached.size(); ++f) {
    gain += cached[f] * popularity[f] * utility[f];
  }
  return weights.utility * gain - weights.memory * free_fraction;
}

RequestStream::RequestStream(FileCatalog catalog, double rate, std::uint64_t seed)
    : catalog_(std::move(catalog)), rate_(rate), rng_(seed) {
  if (!(rate > 0.0)) throw ConfigError("request rate must be positive");
}

RequestEvent RequestStream::next() {
  RequestEvent event;
  event.interarrival = sample_interarrival(rate_, rng_);
  clock_ += event.interarrival;
  event.time = clock_;
  event.file = catalog_.sample(rng_);
  event.trial = ++trial_;
  return event;
}

void RequestStream::set_rate(double rate) {
  if (!(rate > 0.0)) throw ConfigError("request rate must be positive");
  rate_ = rate;
}

void RequestStream::set_probabilities(std::vector<double> probs) {
  catalog_.set_probabilities(std::move(probs));
}

std::vector<double> SystemState::flatten() const {
  std::vector<double> out;
  out.reserve(1 + 6 * cached.size() + pending.size());
  out.push_back(free_fraction);
  for (const auto* part : {&cached, &utility, &popularity, &importance, &lifetime,
                           &size, &pending}) {
    out.insert(out.end(), part->begin(), part->end());
  }
  return out;
}

CacheEnv::CacheEnv(FileCatalog catalog, EnvConfig config, std::uint64_t seed)
    : config_(config),
      stream_(std::move(catalog), config.rate, seed),
      cache_(config.capacity, stream_.catalog().size()),
      window_(config.popularity_window, stream_.catalog().size()) {
  const FileCatalog& cat = stream_.catalog();
  const auto n = static_cast<std::size_t>(cat.size());
  const AttributeRanges& ranges = cat.ranges();
  state_.importance.resize(n);
  state_.lifetime.resize(n);
  state_.size.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const FileType& file = cat.files()[f];
    state_.importance[f] = file.importance;
    state_.lifetime[f] = file.lifetime / ranges.lifetime.hi;
    state_.size[f] = file.size / ranges.size.hi;
  }
  arrive(stream_.next());
}

int CacheEnv::observation_width() const {
  const int f = catalog().size();
  return 1 + 6 * f + (config_.observe_pending ? f : 0);
}

void CacheEnv::arrive(const RequestEvent& event) {
  pending_ = event;
  trace_.push_back(event);
  purge_expired(cache_, catalog(), event.time);
  window_.push(event.file);
  refresh_state();
}

void CacheEnv::refresh_state() {
  state_.free_fraction = cache_.free_fraction();
  state_.cached = cache_.indicator();
  state_.utility = utilities(cache_, catalog(), pending_.time);
  state_.popularity = window_.normalized();
  if (config_.observe_pending) {
    state_.pending.assign(static_cast<std::size_t>(catalog().size()), 0.0);
    state_.pending[static_cast<std::size_t>(pending_.file)] = 1.0;
  } else {
    state_.pending.clear();
  }
}

void CacheEnv::admit(int file) {
  const FileCatalog& cat = catalog();
  const double size = cat.file(file).size;
  if (size > cache_.capacity()) {
    ++uncacheable_;
    return;
  }
  const double t = pending_.time;
  while (cache_.capacity() - cache_.used() < size) {
    const std::vector<double> y = utilities(cache_, cat, t);
    int victim = -1;
    double lowest = std::numeric_limits<double>::infinity();
    for (int f = 0; f < cache_.files(); ++f) {
      if (cache_.contains(f) && y[static_cast<std::size_t>(f)] < lowest) {
        lowest = y[static_cast<std::size_t>(f)];
        victim = f;
      }
    }
    if (victim < 0) throw std::logic_error("eviction found no victim");
    cache_.erase(victim, cat.file(victim).size);
    last_evicted_.push_back(victim);
  }
  cache_.insert(CacheEntry{file, t, t}, size);
}

StepResult CacheEnv::step(int action) {
  if (action != 0 && action != 1) throw std::logic_error("action must be 0 or 1");
  StepResult result;
  last_evicted_.clear();
  const int file = pending_.file;
  result.hit = cache_.contains(file);
  if (action == 1 && !result.hit) {
    admit(file);
    result.admitted = cache_.contains(file);
  }
  refresh_state();
  result.reward = reward(state_.cached, state_.popularity, state_.utility,
                         state_.free_fraction, config_.weights);
  result.evicted = last_evicted_;

  const RequestEvent next = stream_.next();
  result.interarrival = next.interarrival;
  arrive(next);
  return result;
}

}  // namespace edgecache
