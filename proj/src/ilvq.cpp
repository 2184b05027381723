#include "edgecl/ilvq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "edgecl/error.hpp"

namespace edgecl {

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

RunningStats::RunningStats(std::uint64_t count, std::vector<double> mean,
                           std::vector<double> m2)
    : count_(count), mean_(std::move(mean)), m2_(std::move(m2)) {
  if (mean_.size() != m2_.size()) fail(Errc::rejected_input, "running stats size mismatch");
  for (double v : m2_) {
    if (!(v >= 0.0)) fail(Errc::rejected_input, "running stats m2 must be >= 0");
  }
}

void RunningStats::push(std::span<const double> x) {
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    const double delta = x[j] - mean_[j];
    mean_[j] += delta / n;
    m2_[j] += delta * (x[j] - mean_[j]);
    if (m2_[j] < 0.0) m2_[j] = 0.0;
  }
}

double RunningStats::variance(std::size_t j) const {
  if (count_ < 2) return 0.0;
  return m2_[j] / static_cast<double>(count_);
}

double RunningStats::stddev(std::size_t j) const { return std::sqrt(variance(j)); }

PrototypeMemory::PrototypeMemory(std::size_t dim, IlvqParams params)
    : dim_(dim), params_(params), stats_(dim) {
  if (dim == 0) fail(Errc::rejected_input, "prototype memory needs dim >= 1");
  if (params.capacity == 0) fail(Errc::rejected_input, "capacity must be >= 1");
}

PrototypeMemory PrototypeMemory::restore(std::size_t dim, IlvqParams params,
                                         std::vector<Prototype> prototypes,
                                         RunningStats stats, std::uint64_t step) {
  PrototypeMemory m(dim, params);
  if (stats.dim() != dim) fail(Errc::rejected_input, "running stats dimension mismatch");
  for (auto &p : prototypes) {
    check_vector(p.w, dim);
    if (p.wins < 1) fail(Errc::rejected_input, "prototype win count must be >= 1");
    if (p.label != kGood && p.label != kDefective) fail(Errc::rejected_input, "bad label");
  }
  m.prototypes_ = std::move(prototypes);
  m.stats_ = std::move(stats);
  m.step_ = step;
  return m;
}

void PrototypeMemory::insert(Prototype p) {
  check_vector(p.w, dim_);
  prototypes_.push_back(std::move(p));
}

std::vector<Neighbor> PrototypeMemory::nearest(std::span<const double> x,
                                               std::size_t k) const {
  check_vector(x, dim_);
  if (prototypes_.empty()) fail(Errc::empty_memory, "nearest: memory is empty");
  if (k == 0) fail(Errc::rejected_input, "nearest: k must be >= 1");
  std::vector<Neighbor> all;
  all.reserve(prototypes_.size());
  for (std::size_t i = 0; i < prototypes_.size(); ++i) {
    all.push_back({i, distance(x, prototypes_[i].w)});
  }
  const auto by_distance = [this](const Neighbor &a, const Neighbor &b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return prototypes_[a.index].created_at < prototypes_[b.index].created_at;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    by_distance);
  all.resize(k);
  return all;
}

double PrototypeMemory::insertion_threshold() const {
  if (prototypes_.size() < 2) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t i = 0; i < prototypes_.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < prototypes_.size(); ++j) {
      if (i != j) best = std::min(best, distance(prototypes_[i].w, prototypes_[j].w));
    }
    total += best;
  }
  return params_.kappa * total / static_cast<double>(prototypes_.size());
}

void PrototypeMemory::learn(std::span<const double> x, int label) {
  check_vector(x, dim_);
  if (label != kGood && label != kDefective) fail(Errc::rejected_input, "label must be 0 or 1");
  stats_.push(x);
  ++step_;

  const auto insert_at_x = [&] {
    prototypes_.push_back({std::vector<double>(x.begin(), x.end()), label, 1, step_});
  };

  if (prototypes_.empty()) {
    insert_at_x();
    return;
  }

  const double threshold = insertion_threshold();
  const auto ranked = nearest(x, prototypes_.size());
  const Neighbor winner = ranked.front();
  if (prototypes_[winner.index].label != label || winner.distance > threshold) {
    insert_at_x();
    prune();
    return;
  }

  Prototype &s1 = prototypes_[winner.index];
  ++s1.wins;
  const double rate1 = 1.0 / static_cast<double>(s1.wins);
  for (std::size_t j = 0; j < dim_; ++j) s1.w[j] += rate1 * (x[j] - s1.w[j]);

  for (std::size_t r = 1; r < ranked.size(); ++r) {
    Prototype &s2 = prototypes_[ranked[r].index];
    if (s2.label != label) continue;
    const double rate2 = 1.0 / (100.0 * static_cast<double>(s2.wins));
    for (std::size_t j = 0; j < dim_; ++j) s2.w[j] += rate2 * (x[j] - s2.w[j]);
    break;
  }
  prune();
}

void PrototypeMemory::prune() {
  while (prototypes_.size() > params_.capacity) {
    std::map<int, std::size_t> per_class;
    for (const auto &p : prototypes_) ++per_class[p.label];

    std::ptrdiff_t victim = -1;
    for (std::size_t i = 0; i < prototypes_.size(); ++i) {
      const auto &p = prototypes_[i];
      if (per_class[p.label] <= 1) continue;
      if (victim < 0) {
        victim = static_cast<std::ptrdiff_t>(i);
        continue;
      }
      const auto &v = prototypes_[static_cast<std::size_t>(victim)];
      if (p.wins < v.wins || (p.wins == v.wins && p.created_at < v.created_at)) {
        victim = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (victim < 0) return;
    prototypes_.erase(prototypes_.begin() + victim);
  }
}

std::vector<LabeledSample> generate_synthetic(const PrototypeMemory &memory, std::size_t n,
                                              double noise_scale, std::mt19937_64 &rng) {
  if (n == 0) return {};
  if (memory.empty()) fail(Errc::empty_memory, "generate_synthetic: memory is empty");
  if (!(noise_scale >= 0.0)) fail(Errc::rejected_input, "noise scale must be >= 0");

  const auto &protos = memory.prototypes();
  std::vector<double> weights;
  weights.reserve(protos.size());
  for (const auto &p : protos) weights.push_back(static_cast<double>(p.wins));
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

  std::vector<double> sigma(memory.dim());
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    sigma[j] = noise_scale * memory.stats().stddev(j);
  }

  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<LabeledSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Prototype &src = protos[pick(rng)];
    LabeledSample s;
    s.label = src.label;
    s.features.batch_id = "synthetic";
    s.features.values = src.w;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      if (sigma[j] > 0.0) s.features.values[j] += sigma[j] * unit(rng);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace edgecl
