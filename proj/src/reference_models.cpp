#include "mvsim/reference_models.hpp"

#include <algorithm>
#include <cmath>

#include "mvsim/error.hpp"

namespace mvsim {
namespace {

// (exp(x) - 1) / x, continuous at 0.
double expm1_ratio(double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; }

}  // namespace

GaussianFlow::GaussianFlow(double a, double bbar, double sigma0, double m0, double v0)
    : a_(a), bbar_(bbar), sigma0_(sigma0), m0_(m0), v0_(v0) {
  if (!(v0 >= 0.0)) throw DomainError("gaussian flow: initial variance must be nonnegative");
}

double GaussianFlow::mean(double t) const {
  if (!(t >= 0.0)) throw DomainError("gaussian flow: t must be nonnegative");
  return m0_ * std::exp((a_ + bbar_) * t);
}

double GaussianFlow::variance(double t) const {
  if (!(t >= 0.0)) throw DomainError("gaussian flow: t must be nonnegative");
  // v(t) = v0 e^{2at} + sigma0^2 (e^{2at} - 1) / (2a)
  const double x = 2.0 * a_ * t;
  return v0_ * std::exp(x) + sigma0_ * sigma0_ * t * expm1_ratio(x);
}

FlowPoint ou_flow(double a, double bbar, double sigma0, double m0, double v0, double t) {
  return GaussianFlow(a, bbar, sigma0, m0, v0).at(t);
}

LinearInteractionModel::LinearInteractionModel(std::string id, double a, double bbar,
                                               double sigma0)
    : id_(std::move(id)), a_(a), bbar_(bbar), sigma0_(sigma0) {}

RegularityCard LinearInteractionModel::regularity() const {
  RegularityCard card;
  card.eta = 1.0;
  card.lipschitz_in_x_and_measure = true;
  card.smooth = true;
  card.bounded = false;
  card.lipschitz_constant = std::max(std::abs(a_), std::abs(bbar_));
  return card;
}

void LinearInteractionModel::drift(double, std::span<const double> x,
                                   const EmpiricalMeasureView& mu, std::span<double> out) const {
  out[0] = a_ * x[0] + bbar_ * mu.mean()[0];
}

void LinearInteractionModel::diffusion(double, std::span<const double>,
                                       const EmpiricalMeasureView&, std::span<double> out) const {
  out[0] = sigma0_;
}

HolderDriftModel::HolderDriftModel(double c, double eta, double a, double sigma0, double clip)
    : c_(c), eta_(eta), a_(a), sigma0_(sigma0), clip_(clip) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("holder-drift: eta must lie in (0, 1]");
  if (!(clip >= 0.0)) throw DomainError("holder-drift: clip must be nonnegative");
}

RegularityCard HolderDriftModel::regularity() const {
  RegularityCard card;
  card.eta = eta_;
  card.lipschitz_in_x_and_measure = eta_ == 1.0;
  card.smooth = false;
  card.bounded = clip_ > 0.0;
  if (card.lipschitz_in_x_and_measure) {
    card.lipschitz_constant = std::abs(c_) + std::abs(a_);
  }
  return card;
}

void HolderDriftModel::drift(double, std::span<const double> x, const EmpiricalMeasureView& mu,
                             std::span<double> out) const {
  double position = x[0];
  double z = position - mu.mean()[0];
  if (clip_ > 0.0) {
    position = std::clamp(position, -clip_, clip_);
    z = std::clamp(z, -clip_, clip_);
  }
  const double magnitude = eta_ == 1.0 ? std::abs(z) : std::pow(std::abs(z), eta_);
  const double signed_power = z > 0.0 ? magnitude : (z < 0.0 ? -magnitude : 0.0);
  out[0] = c_ * signed_power + a_ * position;
}

void HolderDriftModel::diffusion(double, std::span<const double>, const EmpiricalMeasureView&,
                                 std::span<double> out) const {
  out[0] = sigma0_;
}

RegularityCard ZeroModel::regularity() const {
  RegularityCard card;
  card.lipschitz_in_x_and_measure = true;
  card.smooth = true;
  card.bounded = true;
  card.lipschitz_constant = 0.0;
  return card;
}

void ZeroModel::drift(double, std::span<const double>, const EmpiricalMeasureView&,
                      std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

void ZeroModel::diffusion(double, std::span<const double>, const EmpiricalMeasureView&,
                          std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

const std::vector<CatalogEntry>& model_catalog() {
  static const std::vector<CatalogEntry> catalog = [] {
    std::vector<CatalogEntry> entries;

    ModelParams linear;
    entries.push_back(
        {"ou-linear", "b = a x + bbar mean(mu), sigma = sigma0; Gaussian flow available", linear,
         [](const ModelParams& p) {
           return ModelSetup{
               std::make_shared<LinearInteractionModel>("ou-linear", p.a, p.bbar, p.sigma0),
               InitialLaw{p.m0, p.v0, 1}, GaussianFlow(p.a, p.bbar, p.sigma0, p.m0, p.v0)};
         }});

    ModelParams attract;
    attract.a = -1.0;
    attract.bbar = 1.0;
    entries.push_back(
        {"ou-attract", "b = -(x - mean(mu)), sigma = sigma0; mean constant, v' = -2v + sigma0^2",
         attract, [](const ModelParams& p) {
           return ModelSetup{
               std::make_shared<LinearInteractionModel>("ou-attract", -1.0, 1.0, p.sigma0),
               InitialLaw{p.m0, p.v0, 1}, GaussianFlow(-1.0, 1.0, p.sigma0, p.m0, p.v0)};
         }});

    ModelParams holder;
    holder.a = 0.0;
    holder.eta = 0.5;
    holder.c = -1.0;
    entries.push_back(
        {"holder-drift",
         "b = c sign(z)|z|^eta + a x, z = x - mean(mu), sigma = sigma0; no closed-form law",
         holder, [](const ModelParams& p) {
           return ModelSetup{std::make_shared<HolderDriftModel>(p.c, p.eta, p.a, p.sigma0, p.clip),
                             InitialLaw{p.m0, p.v0, 1}, std::nullopt};
         }});

    ModelParams zero;
    zero.m0 = 0.0;
    entries.push_back({"zero", "b = 0, sigma = 0; the law stays at the initial law", zero,
                       [](const ModelParams& p) {
                         return ModelSetup{std::make_shared<ZeroModel>(1, 1),
                                           InitialLaw{p.m0, p.v0, 1},
                                           GaussianFlow(0.0, 0.0, 0.0, p.m0, p.v0)};
                       }});
    return entries;
  }();
  return catalog;
}

const CatalogEntry& find_model(const std::string& id) {
  const std::string key = id == "hölder-drift" ? "holder-drift" : id;
  for (const auto& entry : model_catalog()) {
    if (entry.id == key) return entry;
  }
  throw DomainError("unknown model id '" + id + "'");
}

}  // namespace mvsim
