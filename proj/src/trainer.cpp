// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/trainer.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lsrgan/error.hpp"
#include "lsrgan/ops.hpp"
#include "lsrgan/parallel.hpp"

namespace lsrgan {

std::vector<std::string> AdamConfig::violations() const {
  std::vector<std::string> out;
  if (!(beta1 >= 0.0 && beta1 < 1.0)) out.push_back("adam.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) out.push_back("adam.beta2 must lie in [0, 1)");
  if (!(eps > 0.0) || !std::isfinite(eps)) out.push_back("adam.eps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    out.push_back("adam.weight_decay must be finite and >= 0");
  }
  return out;
}

template <typename T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 std::uint64_t step, double lr, const AdamConfig& cfg) {
  if (theta.size() != grad.size() || theta.size() != m.size() || theta.size() != v.size()) {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  if (step < 1) throw DomainError("adam_update: step count must be >= 1");
  const double t = static_cast<double>(step);
  const double correct1 = 1.0 - std::pow(cfg.beta1, t);
  const double correct2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = static_cast<double>(grad[i]) + cfg.weight_decay * static_cast<double>(theta[i]);
    const double mi = cfg.beta1 * static_cast<double>(m[i]) + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * static_cast<double>(v[i]) + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / correct1;
    const double v_hat = vi / correct2;
    theta[i] = static_cast<T>(static_cast<double>(theta[i]) - lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

template <typename T>
AdamState<T>::AdamState(const NetworkParams<T>& params) {
  for (const auto& [name, t] : params) {
    moments_.push_back(Moments{name, std::vector<T>(t.numel(), T{0}), std::vector<T>(t.numel(), T{0})});
  }
}

template <typename T>
void AdamState<T>::step(NetworkParams<T>& params, double lr, const AdamConfig& cfg) {
  if (params.size() != moments_.size()) {
    throw ShapeError("adam: optimizer tracks " + std::to_string(moments_.size()) +
                     " parameters, network has " + std::to_string(params.size()));
  }
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    for (T g : t.grad()) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in parameter " + name);
    }
  }
  ++steps_;
  std::size_t k = 0;
  for (auto& [name, t] : params) {
    Moments& mo = moments_[k++];
    if (mo.name != name) throw ShapeError("adam: parameter order changed at " + name);
    std::vector<T> zeros;
    std::span<const T> grad;
    if (t.has_grad()) {
      grad = t.grad();
    } else {
      zeros.assign(t.numel(), T{0});
      grad = zeros;
    }
    adam_update<T>(t.mutable_data(), grad, mo.m, mo.v, steps_, lr, cfg);
  }
}

template <typename T>
const typename AdamState<T>::Moments& AdamState<T>::find(std::string_view name) const {
  for (const auto& mo : moments_) {
    if (mo.name == name) return mo;
  }
  throw Error("adam: unknown parameter " + std::string(name));
}

template <typename T>
const std::vector<T>& AdamState<T>::first_moment(std::string_view name) const {
  return find(name).m;
}

template <typename T>
const std::vector<T>& AdamState<T>::second_moment(std::string_view name) const {
  return find(name).v;
}

template <typename T>
void AdamState<T>::store(Checkpoint& ckpt, std::string_view prefix) const {
  const std::string p(prefix);
  ckpt.put_u64(p + "/steps", steps_);
  for (const auto& mo : moments_) {
    ckpt.put(p + "/m/" + mo.name, Tensor<T>::from({mo.m.size()}, mo.m));
    ckpt.put(p + "/v/" + mo.name, Tensor<T>::from({mo.v.size()}, mo.v));
  }
}

template <typename T>
void AdamState<T>::restore(const Checkpoint& ckpt, std::string_view prefix) {
  const std::string p(prefix);
  steps_ = ckpt.get_u64(p + "/steps");
  for (auto& mo : moments_) {
    auto m = ckpt.get<T>(p + "/m/" + mo.name);
    auto v = ckpt.get<T>(p + "/v/" + mo.name);
    if (m.numel() != mo.m.size() || v.numel() != mo.v.size()) {
      throw IoError("checkpoint: moment size mismatch for " + mo.name);
    }
    mo.m.assign(m.data().begin(), m.data().end());
    mo.v.assign(v.data().begin(), v.data().end());
  }
}

std::string_view to_string(Stage stage) {
  return stage == Stage::kPretrain ? "pretrain" : "finetune";
}

ScheduleConfig ScheduleConfig::pretrain_defaults() {
  ScheduleConfig s;
  s.stage = Stage::kPretrain;
  s.base_lr = 2e-4;
  return s;
}

ScheduleConfig ScheduleConfig::finetune_defaults() {
  ScheduleConfig s;
  s.stage = Stage::kFinetune;
  s.base_lr = 1e-4;
  return s;
}

std::vector<std::string> ScheduleConfig::violations() const {
  std::vector<std::string> out;
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) out.push_back("schedule.base_lr must be positive");
  if (halve_every < 1) out.push_back("schedule.halve_every must be >= 1");
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      out.push_back("schedule.milestones must be strictly increasing");
      break;
    }
  }
  if (batch_size < 1) out.push_back("schedule.batch_size must be >= 1");
  return out;
}

double lr_at(std::uint64_t iter, const ScheduleConfig& schedule) {
  std::uint64_t halvings = 0;
  if (schedule.stage == Stage::kPretrain) {
    halvings = iter / schedule.halve_every;
  } else {
    for (auto m : schedule.milestones) halvings += m <= iter ? 1 : 0;
  }
  return std::ldexp(schedule.base_lr, -static_cast<int>(std::min<std::uint64_t>(halvings, 2000)));
}

std::vector<std::string> TrainConfig::violations() const {
  auto out = schedule.violations();
  for (auto& v : adam.violations()) out.push_back(std::move(v));
  for (auto& v : weights.violations()) out.push_back(std::move(v));
  for (auto& v : ccx.violations()) out.push_back(std::move(v));
  if (history_capacity < 1) out.push_back("history_capacity must be >= 1");
  return out;
}

namespace {

void check_config(const TrainConfig& config) {
  const auto problems = config.violations();
  if (problems.empty()) return;
  std::string msg = "invalid training configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ConfigError(msg);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> batch_tensors(const std::vector<ImagePair>& batch) {
  std::vector<Image> lr, hr;
  lr.reserve(batch.size());
  hr.reserve(batch.size());
  for (const auto& p : batch) {
    lr.push_back(p.lr);
    hr.push_back(p.hr);
  }
  return {to_tensor<T>(std::span<const Image>(lr)), to_tensor<T>(std::span<const Image>(hr))};
}

template <typename T>
double finite_value(const Tensor<T>& loss, const char* what, std::uint64_t iteration) {
  const double v = static_cast<double>(loss.item());
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " diverged (non-finite) at iteration " +
                       std::to_string(iteration));
  }
  return v;
}

// Freezes parameter sets for the lifetime of the guard.
template <typename T>
class FreezeGuard {
 public:
  explicit FreezeGuard(std::vector<NetworkParams<T>*> sets) : sets_(std::move(sets)) {
    for (auto* s : sets_) s->set_requires_grad(false);
  }
  ~FreezeGuard() {
    for (auto* s : sets_) s->set_requires_grad(true);
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<NetworkParams<T>*> sets_;
};

}  // namespace

template <typename T>
TrainSession<T>::TrainSession(Networks<T> nets, const Dataset& data, TrainConfig config)
    : nets_(std::move(nets)),
      data_(&data),
      config_(std::move(config)),
      sampler_(data, config_.seed, config_.schedule.batch_size) {
  init();
  open_log(false);
}

template <typename T>
TrainSession<T>::TrainSession(const Checkpoint& ckpt, const Dataset& data, TrainConfig config)
    : nets_(restore_networks<T>(ckpt)),
      data_(&data),
      config_(std::move(config)),
      sampler_(data, config_.seed, config_.schedule.batch_size) {
  init();
  const bool same_stage =
      ckpt.contains("train/stage") &&
      ckpt.get_u64("train/stage") == static_cast<std::uint64_t>(config_.schedule.stage);
  if (same_stage) {
    state_.iteration = ckpt.get_u64("train/iteration");
    state_.adam_g.restore(ckpt, "adam/G");
    state_.adam_d.restore(ckpt, "adam/D");
    state_.adam_l.restore(ckpt, "adam/L");
    state_.sampler = {ckpt.get_u64("sampler/epoch"), ckpt.get_u64("sampler/position"),
                      ckpt.get_u64("sampler/rng_counter")};
    sampler_.restore(state_.sampler);
    state_.lr = lr_at(state_.iteration, config_.schedule);
  }
  open_log(state_.iteration > 0);
}

template <typename T>
void TrainSession<T>::init() {
  check_config(config_);
  nets_.generator.params.set_requires_grad(true);
  nets_.discriminator.params.set_requires_grad(true);
  nets_.encoder.params.set_requires_grad(true);
  state_.adam_g = AdamState<T>(nets_.generator.params);
  state_.adam_d = AdamState<T>(nets_.discriminator.params);
  state_.adam_l = AdamState<T>(nets_.encoder.params);
  state_.sampler = sampler_.state();
  state_.lr = lr_at(0, config_.schedule);
}

template <typename T>
std::vector<std::string> TrainSession<T>::term_names() const {
  if (config_.schedule.stage == Stage::kPretrain) return {"g_l1", "l_l1"};
  return {"d_loss", "g_total", "perceptual", "adversarial", "pixel", "latent", "l_loss"};
}

template <typename T>
void TrainSession<T>::open_log(bool append) {
  log_.reset();
  if (config_.loss_csv.empty()) return;
  log_ = std::make_unique<std::ofstream>(
      config_.loss_csv, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!*log_) throw IoError("cannot open " + config_.loss_csv.string() + " for writing");
  if (!append) {
    *log_ << "iteration,lr";
    for (const auto& name : term_names()) *log_ << ',' << name;
    *log_ << ",wall_ms\n";
  }
}

template <typename T>
void TrainSession<T>::pretrain_step(const Tensor<T>& z, const Tensor<T>& y,
                                    std::vector<double>& terms) {
  auto& g = nets_.generator;
  auto& l = nets_.encoder;
  const Tensor<T> g_loss = l1_loss(g.forward(z), y);
  terms.push_back(finite_value(g_loss, "generator L1", state_.iteration));
  g.params.zero_grad();
  g_loss.backward();
  state_.adam_g.step(g.params, state_.lr, config_.adam);

  const Tensor<T> l_loss = l1_loss(l.forward(y), z);
  terms.push_back(finite_value(l_loss, "encoder L1", state_.iteration));
  l.params.zero_grad();
  l_loss.backward();
  state_.adam_l.step(l.params, state_.lr, config_.adam);
}

template <typename T>
void TrainSession<T>::finetune_step(const Tensor<T>& z, const Tensor<T>& y,
                                    std::vector<double>& terms) {
  auto& g = nets_.generator;
  auto& d = nets_.discriminator;
  auto& l = nets_.encoder;
  const Tensor<T> gz = g.forward(z);

  const auto ra = relativistic_pair(d.forward(y), d.forward(gz.detach()));
  terms.push_back(finite_value(ra.discriminator, "discriminator loss", state_.iteration));
  d.params.zero_grad();
  ra.discriminator.backward();
  state_.adam_d.step(d.params, state_.lr, config_.adam);

  {
    FreezeGuard<T> freeze({&d.params, &l.params});
    const auto obj = generator_objective(config_.kind, gz, y, d, l, nets_.probe, config_.weights,
                                         config_.ccx);
    terms.push_back(finite_value(obj.total, "generator objective", state_.iteration));
    terms.push_back(obj.perceptual);
    terms.push_back(obj.adversarial);
    terms.push_back(obj.pixel);
    terms.push_back(obj.latent);
    g.params.zero_grad();
    obj.total.backward();
  }
  state_.adam_g.step(g.params, state_.lr, config_.adam);

  const Tensor<T> l_loss = encoder_loss(y, gz.detach(), l);
  terms.push_back(finite_value(l_loss, "encoder loss", state_.iteration));
  l.params.zero_grad();
  l_loss.backward();
  state_.adam_l.step(l.params, state_.lr, config_.adam);
}

template <typename T>
void TrainSession<T>::step() {
  const auto start = std::chrono::steady_clock::now();
  state_.lr = lr_at(state_.iteration, config_.schedule);
  const auto [z, y] = batch_tensors<T>(sampler_.next());
  std::vector<double> terms;
  if (config_.schedule.stage == Stage::kPretrain) {
    pretrain_step(z, y, terms);
  } else {
    finetune_step(z, y, terms);
  }
  state_.sampler = sampler_.state();
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  LossRecord rec{state_.iteration, state_.lr, terms, ms};
  if (log_) {
    *log_ << rec.iteration << ',' << format_number(rec.lr);
    for (double t : rec.terms) *log_ << ',' << format_number(t);
    *log_ << ',' << fmt::format("{:.3f}", rec.wall_ms) << '\n';
  }
  state_.history.push_back(std::move(rec));
  while (state_.history.size() > config_.history_capacity) state_.history.pop_front();
  ++state_.iteration;
  if (state_.iteration % 100 == 0) {
    spdlog::debug("{} iteration {}: {} = {}", to_string(config_.schedule.stage), state_.iteration,
                  term_names().front(), terms.front());
  }
}

template <typename T>
void TrainSession<T>::run() {
  spdlog::info("{}: iterations {}..{}", to_string(config_.schedule.stage), state_.iteration,
               config_.schedule.max_iters);
  while (state_.iteration < config_.schedule.max_iters) step();
  if (log_) log_->flush();
}

template <typename T>
Checkpoint TrainSession<T>::checkpoint() const {
  Checkpoint ckpt;
  store_networks(ckpt, nets_);
  ckpt.put_u64("train/stage", static_cast<std::uint64_t>(config_.schedule.stage));
  ckpt.put_u64("train/iteration", state_.iteration);
  ckpt.put_u64("train/seed", config_.seed);
  state_.adam_g.store(ckpt, "adam/G");
  state_.adam_d.store(ckpt, "adam/D");
  state_.adam_l.store(ckpt, "adam/L");
  ckpt.put_u64("sampler/epoch", state_.sampler.epoch);
  ckpt.put_u64("sampler/position", state_.sampler.position);
  ckpt.put_u64("sampler/rng_counter", state_.sampler.rng_counter);
  return ckpt;
}

template <typename T>
double dataset_l1(const Generator<T>& generator, const Dataset& data) {
  NoGradGuard no_grad;
  double total = 0.0;
  for (const auto& pair : data.pairs()) {
    total += static_cast<double>(
        l1_loss(generator.forward(to_tensor<T>(pair.lr)), to_tensor<T>(pair.hr)).item());
  }
  return total / static_cast<double>(data.size());
}

std::vector<SweepRow> mu_sweep(const std::vector<double>& mus, const Checkpoint& start,
                               const Dataset& data, const TrainConfig& base,
                               const std::vector<ImagePair>& eval,
                               const std::filesystem::path& loss_csv_dir) {
  std::vector<SweepRow> rows;
  for (double mu : mus) {
    if (!(mu >= 0.0 && mu <= 1e-2)) {
      spdlog::warn("mu sweep: value {} lies outside [0, 1e-2]", mu);
    }
    TrainConfig cfg = base;
    cfg.schedule.stage = Stage::kFinetune;
    cfg.weights.mu = mu;
    cfg.loss_csv = loss_csv_dir.empty()
                       ? std::filesystem::path{}
                       : loss_csv_dir / ("finetune_mu_" + format_number(mu) + ".csv");
    TrainSession<float> session(start, data, cfg);
    session.run();
    SweepRow row;
    row.mu = mu;
    row.fingerprint = session.networks().generator.params.fingerprint();
    row.report = evaluate(session.networks().generator, eval, worker_threads());
    row.checkpoint = session.checkpoint();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_table_csv(const std::vector<SweepRow>& rows) {
  std::string out = "mu,psnr_db,ssim,l1,psnr_stddev,ssim_stddev,l1_stddev,fingerprint\n";
  for (const auto& r : rows) {
    out += format_number(r.mu) + "," + format_number(r.report.psnr.mean) + "," +
           format_number(r.report.ssim.mean) + "," + format_number(r.report.l1.mean) + "," +
           format_number(r.report.psnr.stddev) + "," + format_number(r.report.ssim.stddev) + "," +
           format_number(r.report.l1.stddev) + "," + fmt::format("{:016x}", r.fingerprint) + "\n";
  }
  return out;
}

template void adam_update<float>(std::span<float>, std::span<const float>, std::span<float>,
                                 std::span<float>, std::uint64_t, double, const AdamConfig&);
template void adam_update<double>(std::span<double>, std::span<const double>, std::span<double>,
                                  std::span<double>, std::uint64_t, double, const AdamConfig&);
template class AdamState<float>;
template class AdamState<double>;
template class TrainSession<float>;
template class TrainSession<double>;
template double dataset_l1<float>(const Generator<float>&, const Dataset&);
template double dataset_l1<double>(const Generator<double>&, const Dataset&);

}  // namespace lsrgan
