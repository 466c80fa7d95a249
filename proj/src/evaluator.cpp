#include "nestevo/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nestevo/error.hpp"

namespace nestevo {

namespace {

constexpr double kProbFloor = 1e-12;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

long long khz(double ghz) { return std::llround(ghz * 1.0e6); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + what + ": '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument(std::string("trailing characters in ") + what + ": '" + s + "'");
  return v;
}

}  // namespace

LayerTable::LayerTable(const BackboneGenome& b, const SearchSpaceSpec& space) {
  const double r = space.resolution_domain.at(static_cast<std::size_t>(b.resolution_idx));
  const double res_scale = (r / 32.0) * (r / 32.0);
  for (const auto& blk : b.blocks) {
    const double d = space.depth_domain.at(static_cast<std::size_t>(blk.depth_idx));
    const double w = space.width_domain.at(static_cast<std::size_t>(blk.width_idx));
    const double k = space.kernel_domain.at(static_cast<std::size_t>(blk.kernel_idx));
    const double e = space.expand_domain.at(static_cast<std::size_t>(blk.expand_idx));
    const double block_flops = d * w * e * k * k * res_scale;
    const double block_bytes = 4.0 * d * w * e;
    for (int l = 0; l < static_cast<int>(d); ++l) {
      flops_.push_back(block_flops / d);
      bytes_.push_back(block_bytes / d);
    }
  }
  cum_flops_.assign(flops_.size() + 1, 0.0);
  cum_bytes_.assign(bytes_.size() + 1, 0.0);
  for (std::size_t i = 0; i < flops_.size(); ++i) {
    cum_flops_[i + 1] = cum_flops_[i] + flops_[i];
    cum_bytes_[i + 1] = cum_bytes_[i] + bytes_[i];
  }
}

double LayerTable::layer_flops(int layer) const {
  if (layer < 1 || layer > total_layers()) throw std::out_of_range("layer index out of range");
  return flops_[static_cast<std::size_t>(layer - 1)];
}

double LayerTable::prefix_flops(int upto_layer) const {
  if (upto_layer < 1 || upto_layer > total_layers()) throw std::out_of_range("prefix length out of range");
  return cum_flops_[static_cast<std::size_t>(upto_layer)];
}

double LayerTable::prefix_bytes(int upto_layer) const {
  if (upto_layer < 1 || upto_layer > total_layers()) throw std::out_of_range("prefix length out of range");
  return cum_bytes_[static_cast<std::size_t>(upto_layer)];
}

Workload LayerTable::prefix(int upto_layer, std::span<const int> exit_positions, double overhead_fraction) const {
  Workload w{prefix_flops(upto_layer), prefix_bytes(upto_layer)};
  for (int pos : exit_positions) {
    if (pos > upto_layer) continue;
    w.flops += overhead_fraction * layer_flops(pos);
  }
  return w;
}

Workload workload_of(const BackboneGenome& b, const SearchSpaceSpec& space, std::optional<int> upto_layer,
                     std::span<const int> exit_positions, double overhead_fraction) {
  const LayerTable layers(b, space);
  return layers.prefix(upto_layer.value_or(layers.total_layers()), exit_positions, overhead_fraction);
}

void SurrogateParams::validate() const {
  if (!(a_max > 0.0 && a_max <= 1.0)) throw std::invalid_argument("a_max must be in (0,1]");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(noise_eps >= 0.0)) throw std::invalid_argument("noise_eps must be nonnegative");
  if (!(sigmoid_slope > 0.0)) throw std::invalid_argument("sigmoid_slope must be positive");
  if (!std::isfinite(sigmoid_midpoint)) throw std::invalid_argument("sigmoid_midpoint must be finite");
}

double reference_flops(const SearchSpaceSpec& space) {
  auto mid = [](std::size_t n) { return static_cast<int>((n - 1) / 2); };
  BackboneGenome b;
  b.resolution_idx = mid(space.resolution_domain.size());
  b.blocks.assign(static_cast<std::size_t>(space.n_block),
                  BlockGene{mid(space.depth_domain.size()), mid(space.width_domain.size()),
                            mid(space.kernel_domain.size()), mid(space.expand_domain.size())});
  return LayerTable(b, space).full().flops;
}

double accuracy_surrogate(const BackboneGenome& b, const SearchSpaceSpec& space, std::uint64_t seed,
                          const SurrogateParams& params) {
  const double c = LayerTable(b, space).full().flops;
  const double c_ref = reference_flops(space);
  const std::uint64_t h = hash_combine(b.hash(), seed);
  const double noise = 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
  const double acc = params.a_max * (1.0 - std::exp(-params.lambda * c / c_ref)) + params.noise_eps * noise;
  return std::clamp(acc, 0.02, 0.98);
}

double ExitProfile::n_at(int position) const {
  if (positions.empty() || position < positions.front() || position > positions.back())
    throw std::out_of_range("exit position is not admissible");
  return n_values[static_cast<std::size_t>(position - positions.front())];
}

ExitProfile exit_profile(const BackboneGenome& b, const SearchSpaceSpec& space, std::uint64_t seed,
                         const SurrogateParams& params) {
  const LayerTable layers(b, space);
  ExitProfile profile;
  profile.final_accuracy = accuracy_surrogate(b, space, seed, params);
  profile.positions = admissible_positions(b, space);
  const double full = layers.full().flops;
  profile.n_values.reserve(profile.positions.size());
  for (int pos : profile.positions) {
    const double ratio = layers.prefix_flops(pos) / full;
    profile.n_values.push_back(profile.final_accuracy *
                               logistic(params.sigmoid_slope * (ratio - params.sigmoid_midpoint)));
  }
  return profile;
}

void HardwareModelParams::validate() const {
  if (!(kappa_compute > 0.0) || !(kappa_memory > 0.0)) throw std::invalid_argument("kappa values must be positive");
  if (!(p0 > 0.0) || !(p1 > 0.0)) throw std::invalid_argument("p0 and p1 must be positive");
  if (!(p2 >= 0.0)) throw std::invalid_argument("p2 must be nonnegative");
  if (!(exit_overhead_fraction >= 0.0)) throw std::invalid_argument("exit_overhead_fraction must be nonnegative");
}

HwCost hw_latency_energy(const Workload& w, const DeviceSpec& device, const DvfsGenome& f,
                         const HardwareModelParams& params) {
  if (!f.is_valid_for(device)) throw StructuralError("dvfs genome does not index device " + device.name);
  const double fc = f.compute_ghz(device);
  const double fm = f.memory_ghz(device);
  const double latency = w.flops / (params.kappa_compute * fc) + w.bytes / (params.kappa_memory * fm);
  const double power = params.p0 + params.p1 * fc * fc * fc + params.p2 * fm;
  return {latency, power * latency / 1.0e3};
}

SyntheticBackend::SyntheticBackend(HardwareModelParams params) : params_(params) { params_.validate(); }

HwCost SyntheticBackend::cost(const Workload& w, const DeviceSpec& device, const DvfsGenome& f) const {
  return hw_latency_energy(w, device, f, params_);
}

TableBackend TableBackend::from_csv(const std::string& text) {
  TableBackend t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("lookup table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw std::invalid_argument("lookup table header mismatch: '" + line + "'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6)
      throw std::invalid_argument("lookup table line " + std::to_string(lineno) + ": expected 6 fields");
    const double bucket = parse_double(f[1], "bucket_log10_flops");
    const double fc = parse_double(f[2], "f_compute_ghz");
    const long long fm = f[3].empty() ? -1 : khz(parse_double(f[3], "f_emc_ghz"));
    const double lat = parse_double(f[4], "latency_ms");
    const double en = parse_double(f[5], "energy_mj");
    if (!(lat > 0.0) || !(en > 0.0))
      throw std::invalid_argument("lookup table line " + std::to_string(lineno) + ": costs must be positive");
    t.table_[f[0]][{khz(fc), fm}].push_back({bucket, lat, en});
    ++t.rows_;
  }
  for (auto& [dev, rows] : t.table_) {
    for (auto& [key, buckets] : rows) {
      std::sort(buckets.begin(), buckets.end(),
                [](const Bucket& a, const Bucket& b) { return a.log10_flops < b.log10_flops; });
      for (std::size_t i = 1; i < buckets.size(); ++i)
        if (buckets[i].log10_flops == buckets[i - 1].log10_flops)
          throw std::invalid_argument("lookup table has duplicate bucket for device " + dev);
    }
  }
  return t;
}

TableBackend TableBackend::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open lookup table " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

HwCost TableBackend::lookup(const std::string& device, double log10_flops, double f_compute_ghz,
                            std::optional<double> f_emc_ghz) const {
  const auto dev = table_.find(device);
  if (dev == table_.end()) throw std::out_of_range("lookup table has no device " + device);
  const FreqKey key{khz(f_compute_ghz), f_emc_ghz ? khz(*f_emc_ghz) : -1};
  const auto row = dev->second.find(key);
  if (row == dev->second.end()) throw std::out_of_range("lookup table has no row for this frequency pair");
  const auto& b = row->second;
  if (log10_flops <= b.front().log10_flops) return {b.front().latency_ms, b.front().energy_mj};
  if (log10_flops >= b.back().log10_flops) return {b.back().latency_ms, b.back().energy_mj};
  const auto hi = std::lower_bound(b.begin(), b.end(), log10_flops,
                                   [](const Bucket& x, double v) { return x.log10_flops < v; });
  if (hi->log10_flops == log10_flops) return {hi->latency_ms, hi->energy_mj};
  const auto lo = hi - 1;
  const double t = (log10_flops - lo->log10_flops) / (hi->log10_flops - lo->log10_flops);
  auto interp = [t](double a, double c) { return std::exp((1.0 - t) * std::log(a) + t * std::log(c)); };
  return {interp(lo->latency_ms, hi->latency_ms), interp(lo->energy_mj, hi->energy_mj)};
}

HwCost TableBackend::cost(const Workload& w, const DeviceSpec& device, const DvfsGenome& f) const {
  if (!f.is_valid_for(device)) throw StructuralError("dvfs genome does not index device " + device.name);
  if (!(w.flops > 0.0)) throw std::invalid_argument("table backend needs a positive workload");
  std::optional<double> fm;
  if (device.has_emc()) fm = f.memory_ghz(device);
  return lookup(device.name, std::log10(w.flops), f.compute_ghz(device), fm);
}

StaticScore eval_static(const BackboneGenome& b, const SearchSpaceSpec& space, const DeviceSpec& device,
                        const HardwareBackend& backend, const SurrogateParams& surrogate, std::uint64_t seed) {
  b.check(space);
  const auto cost = backend.cost(LayerTable(b, space).full(), device, default_dvfs(device));
  return {accuracy_surrogate(b, space, seed, surrogate), cost.latency_ms, cost.energy_mj};
}

Evaluator::Evaluator(SearchSpaceSpec space, std::string device, std::shared_ptr<const HardwareBackend> backend,
                     SurrogateParams surrogate, double exit_overhead_fraction, std::uint64_t seed)
    : space_(std::move(space)),
      device_(std::move(device)),
      backend_(std::move(backend)),
      surrogate_(surrogate),
      exit_overhead_(exit_overhead_fraction),
      seed_(seed),
      counters_(std::make_unique<Counters>()) {
  space_.validate();
  (void)space_.device(device_);
  surrogate_.validate();
  if (!backend_) throw std::invalid_argument("evaluator needs a hardware backend");
  if (!(exit_overhead_ >= 0.0)) throw std::invalid_argument("exit overhead must be nonnegative");
}

StaticScore Evaluator::evaluate_static(const BackboneGenome& b) const {
  counters_->static_evals.fetch_add(1, std::memory_order_relaxed);
  return eval_static(b, space_, device(), *backend_, surrogate_, seed_);
}

ExitProfile Evaluator::profile(const BackboneGenome& b) const { return exit_profile(b, space_, seed_, surrogate_); }

HwCost Evaluator::cost(const Workload& w, const DvfsGenome& f) const { return backend_->cost(w, device(), f); }

void Evaluator::reset_counters() const {
  counters_->static_evals.store(0);
  counters_->dynamic_evals.store(0);
}

std::vector<double> soften(std::span<const double> p, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  std::vector<double> out(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::pow(std::max(p[i], kProbFloor), 1.0 / temperature);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

namespace {

void check_distribution(std::span<const double> p, std::size_t classes) {
  if (p.size() != classes) throw std::invalid_argument("probability vectors differ in class count");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("probabilities must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probability vector does not sum to 1");
}

}  // namespace

LossRecord hybrid_loss(std::span<const LossSample> batch, double temperature) {
  if (batch.empty()) throw std::invalid_argument("hybrid loss needs a non-empty batch");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  double nll_sum = 0.0;
  double kd_sum = 0.0;
  for (const auto& s : batch) {
    const std::size_t classes = s.final_probs.size();
    if (classes == 0) throw std::invalid_argument("empty class distribution");
    if (s.exit_probs.empty()) throw std::invalid_argument("sample has no exit predictions");
    if (s.label >= classes) throw std::invalid_argument("label out of range");
    check_distribution(s.final_probs, classes);
    const auto teacher = soften(s.final_probs, temperature);
    double nll = 0.0;
    double kd = 0.0;
    for (const auto& exit : s.exit_probs) {
      check_distribution(exit, classes);
      nll += -std::log(std::max(exit[s.label], kProbFloor));
      const auto student = soften(exit, temperature);
      double kl = 0.0;
      for (std::size_t c = 0; c < classes; ++c) kl += teacher[c] * (std::log(teacher[c]) - std::log(student[c]));
      kd += std::max(kl, 0.0) * temperature * temperature;
    }
    const double exits = static_cast<double>(s.exit_probs.size());
    nll_sum += nll / exits;
    kd_sum += kd / exits;
  }
  const double n = static_cast<double>(batch.size());
  LossRecord rec{nll_sum / n, kd_sum / n, 0.0};
  rec.total = rec.nll + rec.kd;
  return rec;
}

LossRecord hybrid_loss(const LossSample& sample, double temperature) {
  return hybrid_loss(std::span<const LossSample>(&sample, 1), temperature);
}

}  // namespace nestevo
