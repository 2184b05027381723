#include "edgecl/plant_sim.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "edgecl/error.hpp"
#include "edgecl/ingest.hpp"

namespace edgecl {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

PlantConfig PlantConfig::default_config() {
  using V = Variable;
  PlantConfig cfg;
  cfg.manifest = FeatureManifest::default_manifest();
  // phase, variable, mean, std
  const std::vector<VariableParams> base = {
      {1, V::temperature, 8.0, 1.0},     {1, V::pH, 6.6, 0.08},
      {1, V::fat_ratio, 0.12, 0.01},     {1, V::protein_ratio, 0.035, 0.003},
      {1, V::flow_rate, 120.0, 10.0},    {2, V::temperature, 72.0, 1.5},
      {2, V::pH, 6.5, 0.07},             {2, V::fat_ratio, 0.20, 0.015},
      {2, V::pressure, 2.5, 0.2},        {3, V::temperature, 30.0, 1.2},
      {3, V::pH, 4.6, 0.1},              {3, V::fat_ratio, 0.22, 0.015},
      {3, V::lactose, 0.03, 0.004},      {4, V::temperature, 45.0, 2.0},
      {4, V::pressure, 3.0, 0.3},        {5, V::temperature, 60.0, 2.0},
      {5, V::pH, 4.7, 0.08},             {5, V::fat_ratio, 0.25, 0.02},
      {5, V::flow_rate, 500.0, 40.0},    {5, V::viscosity, 1.2, 0.15},
      {6, V::temperature, 75.0, 1.5},    {6, V::frequency, 50.0, 0.5},
  };
  for (auto p : base) {
    p.jitter = 0.1 * p.std;
    cfg.variables.push_back(p);
  }

  // Effect of one setpoint standard deviation on hardness, per manifest slot.
  const std::vector<double> per_std = {0.8, -0.6, 0.5, 0.4, -0.5, 0.6, 0.7, -0.4, 0.3,
                                       1.5, 1.2, 1.0, 1.3, 1.1};
  constexpr double kCentre = 50.0;
  cfg.hardness_intercept = kCentre;
  const auto &slots = cfg.manifest.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const VariableParams *p = cfg.find(slots[i].phase, slots[i].variable);
    const double coef = per_std[i] / p->std;
    cfg.hardness_coefficients.push_back(coef);
    cfg.hardness_intercept -= coef * p->mean;
  }
  cfg.hardness_noise = 0.4;
  // Phi^-1(0.76): a centred band holding 52% of the mass.
  const double half_width = 0.7063 * cfg.hardness_std();
  cfg.band_lo = kCentre - half_width;
  cfg.band_hi = kCentre + half_width;
  cfg.start = Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 5 / 1}} +
              std::chrono::hours{6};
  return cfg;
}

void PlantConfig::validate() const {
  for (const auto &v : variables) {
    if (v.phase < 1 || v.phase > 6) fail(Errc::invalid_spec, "variable phase out of range");
    if (!(v.std >= 0.0) || !(v.jitter >= 0.0)) fail(Errc::invalid_spec, "stds must be >= 0");
    if (!std::isfinite(v.mean)) fail(Errc::invalid_spec, "mean must be finite");
  }
  if (hardness_coefficients.size() != manifest.dim()) {
    fail(Errc::invalid_spec, "one hardness coefficient per manifest slot required");
  }
  for (const auto &s : manifest.slots()) {
    if (!find(s.phase, s.variable)) {
      fail(Errc::invalid_spec, "manifest slot " + s.name() + " has no generator");
    }
  }
  if (!(band_lo < band_hi)) fail(Errc::invalid_spec, "band requires h_lo < h_hi");
  if (!(hardness_noise >= 0.0)) fail(Errc::invalid_spec, "hardness noise must be >= 0");
  if (!(rate_per_minute > 0.0)) fail(Errc::invalid_spec, "emission rate must be > 0");
  if (static_readings < 1 || dynamic_readings < 0) fail(Errc::invalid_spec, "reading counts");
}

const VariableParams *PlantConfig::find(int phase, Variable v) const {
  for (const auto &p : variables) {
    if (p.phase == phase && p.variable == v) return &p;
  }
  return nullptr;
}

double PlantConfig::hardness_mean() const {
  double m = hardness_intercept;
  const auto &slots = manifest.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    m += hardness_coefficients[i] * find(slots[i].phase, slots[i].variable)->mean;
  }
  return m;
}

double PlantConfig::hardness_std() const {
  double var = hardness_noise * hardness_noise;
  const auto &slots = manifest.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double s = hardness_coefficients[i] * find(slots[i].phase, slots[i].variable)->std;
    var += s * s;
  }
  return std::sqrt(var);
}

double PlantConfig::defect_probability() const {
  const double m = hardness_mean();
  const double s = hardness_std();
  if (s == 0.0) return (m < band_lo || m > band_hi) ? 1.0 : 0.0;
  return 1.0 - (normal_cdf((band_hi - m) / s) - normal_cdf((band_lo - m) / s));
}

std::chrono::milliseconds batch_duration(const PlantConfig &cfg) {
  using namespace std::chrono;
  const auto interval = milliseconds(static_cast<std::int64_t>(60000.0 / cfg.rate_per_minute));
  milliseconds total{0};
  for (int phase = 1; phase <= 6; ++phase) {
    bool any = false;
    for (const auto &v : cfg.variables) any = any || v.phase == phase;
    if (!any) continue;
    total += phase == 5 ? interval * cfg.dynamic_readings : minutes(cfg.static_readings);
  }
  return total;
}

SimulatedBatch simulate_batch(const PlantConfig &cfg, std::mt19937_64 &rng,
                              const std::string &batch_id, Timestamp start) {
  using namespace std::chrono;
  cfg.validate();
  std::normal_distribution<double> unit(0.0, 1.0);

  std::vector<double> setpoint(cfg.variables.size());
  for (std::size_t k = 0; k < cfg.variables.size(); ++k) {
    setpoint[k] = cfg.variables[k].mean + cfg.variables[k].std * unit(rng);
  }

  SimulatedBatch batch;
  batch.batch_id = batch_id;
  double h = cfg.hardness_intercept;
  const auto &slots = cfg.manifest.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const VariableParams *p = cfg.find(slots[i].phase, slots[i].variable);
    h += cfg.hardness_coefficients[i] * setpoint[static_cast<std::size_t>(p - cfg.variables.data())];
  }
  h += cfg.hardness_noise * unit(rng);
  batch.true_hardness = h;
  batch.true_label = (h < cfg.band_lo || h > cfg.band_hi) ? kDefective : kGood;

  const auto interval = milliseconds(static_cast<std::int64_t>(60000.0 / cfg.rate_per_minute));
  Timestamp t = start;
  for (int phase = 1; phase <= 6; ++phase) {
    std::vector<std::size_t> vars;
    for (std::size_t k = 0; k < cfg.variables.size(); ++k) {
      if (cfg.variables[k].phase == phase) vars.push_back(k);
    }
    if (vars.empty()) continue;
    const int count = phase == 5 ? cfg.dynamic_readings : cfg.static_readings;
    const milliseconds step = phase == 5 ? interval : milliseconds(minutes(1));
    for (int r = 0; r < count; ++r) {
      for (std::size_t k : vars) {
        const auto &p = cfg.variables[k];
        batch.readings.push_back(
            {t + step * r, batch_id, phase, p.variable, setpoint[k] + p.jitter * unit(rng)});
      }
    }
    t += step * count;
  }
  return batch;
}

PlantSimulator::PlantSimulator(PlantConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
  cfg_.validate();
}

void PlantSimulator::set_config(PlantConfig cfg) {
  cfg.validate();
  cfg_ = std::move(cfg);
}

SimulatedBatch PlantSimulator::next_batch() {
  char id[32];
  std::snprintf(id, sizeof id, "B%05llu", static_cast<unsigned long long>(index_));
  const Timestamp start = cfg_.start + batch_duration(cfg_) * static_cast<std::int64_t>(index_);
  ++index_;
  return simulate_batch(cfg_, rng_, id, start);
}

std::size_t emit(const SimulatedBatch &batch, std::ostream &sink) {
  for (const auto &r : batch.readings) sink << format_reading(r) << '\n';
  const Timestamp end = batch.readings.empty() ? Timestamp{} : batch.readings.back().timestamp;
  sink << format_batch_end({end, batch.batch_id}) << '\n';
  if (!sink) fail(Errc::storage, "emit: sink write failed");
  return batch.readings.size() + 1;
}

PlantConfig inject_drift(const PlantConfig &cfg, const std::vector<VariableShift> &shifts) {
  PlantConfig out = cfg;
  for (const auto &s : shifts) {
    bool found = false;
    for (auto &p : out.variables) {
      if (p.phase == s.phase && p.variable == s.variable) {
        p.mean += s.offset;
        found = true;
      }
    }
    if (!found) {
      fail(Errc::invalid_spec, "inject_drift: unknown variable p" + std::to_string(s.phase) + "_" +
                                   std::string(variable_name(s.variable)));
    }
  }
  return out;
}

std::vector<VariableShift> dynamic_shift(const PlantConfig &cfg, double stds) {
  std::vector<VariableShift> out;
  for (const auto &s : cfg.manifest.slots()) {
    if (s.source() != SlotSource::dynamic) continue;
    out.push_back({s.phase, s.variable, stds * cfg.find(s.phase, s.variable)->std});
  }
  return out;
}

std::vector<FeatureVector> assemble_batch(const SimulatedBatch &batch,
                                          const FeatureManifest &manifest) {
  IngestSession session(manifest);
  std::vector<FeatureVector> out;
  for (const auto &r : batch.readings) {
    if (auto v = session.accept(r)) out.push_back(std::move(*v));
  }
  return out;
}

std::vector<LabeledSample> sample_labeled(PlantSimulator &sim, std::size_t n) {
  std::vector<LabeledSample> out;
  out.reserve(n);
  while (out.size() < n) {
    SimulatedBatch b = sim.next_batch();
    auto vectors = assemble_batch(b, sim.config().manifest);
    if (vectors.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, vectors.size() - 1);
    out.push_back({std::move(vectors[pick(sim.rng())]), b.true_label});
  }
  return out;
}

ConfusionReport confusion_from_counts(std::uint64_t alarm_defect, std::uint64_t no_alarm_defect,
                                      std::uint64_t alarm_good, std::uint64_t no_alarm_good) {
  ConfusionReport r{alarm_defect, no_alarm_defect, alarm_good, no_alarm_good, {}, {}};
  if (const auto alarms = alarm_defect + alarm_good; alarms > 0) {
    r.alarm_precision = static_cast<double>(alarm_defect) / static_cast<double>(alarms);
  }
  if (const auto quiet = no_alarm_defect + no_alarm_good; quiet > 0) {
    r.no_alarm_correctness = static_cast<double>(no_alarm_good) / static_cast<double>(quiet);
  }
  return r;
}

ConfusionReport score_alarms(const std::vector<AlarmOutcome> &outcomes) {
  if (outcomes.empty()) fail(Errc::empty_input, "score_alarms: no outcomes");
  std::uint64_t ad = 0, nd = 0, ag = 0, ng = 0;
  for (const auto &o : outcomes) {
    const bool defect = o.true_label == kDefective;
    if (o.alarm) (defect ? ad : ag)++;
    else (defect ? nd : ng)++;
  }
  return confusion_from_counts(ad, nd, ag, ng);
}

void write_labels_header(std::ostream &out) { out << "batch_id,true_hardness,true_label\n"; }

void write_label_row(std::ostream &out, const SimulatedBatch &batch) {
  out << batch.batch_id << ',' << shortest_decimal(batch.true_hardness) << ','
      << batch.true_label << '\n';
}

std::vector<LabelRow> read_labels_csv(std::istream &in) {
  std::vector<LabelRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "batch_id,true_hardness,true_label") {
        fail(Errc::rejected_input, "labels sidecar: unexpected header");
      }
      continue;
    }
    std::istringstream ss(line);
    LabelRow row;
    std::string hardness, label;
    if (!std::getline(ss, row.batch_id, ',') || !std::getline(ss, hardness, ',') ||
        !std::getline(ss, label)) {
      fail(Errc::rejected_input, "labels sidecar: bad row '" + line + "'");
    }
    try {
      row.true_hardness = std::stod(hardness);
      row.true_label = std::stoi(label);
    } catch (const std::exception &) {
      fail(Errc::rejected_input, "labels sidecar: bad row '" + line + "'");
    }
    if (row.true_label != 0 && row.true_label != 1) {
      fail(Errc::rejected_input, "labels sidecar: label must be 0 or 1");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace edgecl
