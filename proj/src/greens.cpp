#include "xcav/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xcav/error.hpp"

namespace xcav {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();
// Evaluation is allowed this far outside the layered part.
constexpr double kDomainPadding_nm = 1e6;

double safe_log_abs(cplx v) {
  const double a = std::abs(v);
  return a > 0.0 ? std::log(a) : -kInf;
}

// a exp(i k dz) and b exp(-i k dz) with a common scale pulled out.
struct Shifted {
  cplx a, b;
  double log_scale;
};

Shifted shift(cplx a, cplx b, double log_scale, cplx k, double dz) {
  if (dz == 0.0) return {a, b, log_scale};
  const double la = safe_log_abs(a) - k.imag() * dz;
  const double lb = safe_log_abs(b) + k.imag() * dz;
  const double L = std::max(la, lb);
  if (!std::isfinite(L)) return {0.0, 0.0, log_scale};
  const cplx ea = a == 0.0 ? cplx{} : a * std::exp(I * k * dz - L);
  const cplx eb = b == 0.0 ? cplx{} : b * std::exp(-I * k * dz - L);
  return {ea, eb, log_scale + L};
}

Region make_region(const Material& m, double z_ref, double thickness, const ScatterContext& ctx,
                   const Material& top) {
  Region r;
  r.z_ref = z_ref;
  r.thickness = thickness;
  r.eps = m.permittivity();
  r.kz = ctx.kz(m, top);
  r.weight = ctx.polarization == Polarization::s ? cplx{1.0} : 1.0 / r.eps;
  if (std::abs(r.kz) == 0.0) throw NumericError("kz vanishes in '" + m.name + "' (incidence exactly at a critical angle)");
  return r;
}

std::vector<Region> make_regions(const LayerStack& stack, const ScatterContext& ctx) {
  std::vector<Region> regions;
  regions.reserve(stack.layers.size() + 2);
  regions.push_back(make_region(stack.superstrate, 0.0, kInf, ctx, stack.superstrate));
  for (const auto& l : stack.layers) regions.push_back(make_region(l.material, l.z_top_nm, l.thickness_nm, ctx, stack.superstrate));
  regions.push_back(make_region(stack.substrate, stack.total_thickness_nm(), kInf, ctx, stack.superstrate));
  return regions;
}

std::size_t locate(const std::vector<Region>& regions, double z) {
  if (z < 0.0) return 0;
  const std::size_t n_layers = regions.size() - 2;
  // first layer whose bottom is at or below z
  std::size_t lo = 1, hi = n_layers + 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (regions[mid].z_ref + regions[mid].thickness < z)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

cplx kz_branch(cplx eps, double k0, cplx p_rho) {
  cplx kz = std::sqrt(eps * k0 * k0 - p_rho * p_rho);
  if (kz.imag() < 0.0 || (kz.imag() == 0.0 && kz.real() < 0.0)) kz = -kz;
  return kz;
}

cplx kz_branch(cplx eps, cplx eps_top, double k0, double angle_rad) {
  // eps - eps_top cos^2 = (eps - eps_top) + eps_top sin^2 avoids the
  // cancellation at grazing angles
  const double s = std::sin(angle_rad);
  cplx kz = k0 * std::sqrt((eps - eps_top) + eps_top * s * s);
  if (kz.imag() < 0.0 || (kz.imag() == 0.0 && kz.real() < 0.0)) kz = -kz;
  return kz;
}

cplx ScatterContext::kz(const Material& layer, const Material& superstrate) const {
  return kz_branch(layer.permittivity(), superstrate.permittivity(), k0(), angle_rad());
}

cplx ScatterContext::p_rho(const Material& superstrate) const {
  return superstrate.refractive_index() * k0() * std::cos(angle_rad());
}

void ScatterContext::validate() const {
  if (!(energy_keV > 0.0)) throw ConfigError("photon energy must be positive", "context.energy_keV");
  if (!(angle_mrad > 0.0 && angle_mrad < 1000.0 * std::numbers::pi / 2))
    throw ConfigError("incidence angle must lie in (0, pi/2)", "context.angle_mrad");
  if (!(source_offset_nm > 0.0))
    throw ContractError("the line source must sit in the superstrate (source_offset_nm > 0)");
}

GreensFunction1D::GreensFunction1D(const LayerStack& stack, const ScatterContext& ctx) {
  ctx.validate();
  p_rho_ = ctx.p_rho(stack.superstrate);
  regions_ = make_regions(stack, ctx);
  total_ = stack.total_thickness_nm();
  z_src_ = ctx.source_z();

  const std::size_t n = regions_.size();

  // psi_top = exp(-i kz z) in the superstrate, carried downward.
  top_.resize(n);
  top_[0] = {0.0, 1.0, 0.0};
  for (std::size_t i = 1; i < n; ++i) {
    const Region& prev = regions_[i - 1];
    const Region& cur = regions_[i];
    const double dz = i == 1 ? 0.0 : prev.thickness;
    const Shifted s = shift(top_[i - 1].a, top_[i - 1].b, top_[i - 1].log_scale, prev.kz, dz);
    const cplx v = s.a + s.b;
    const cplx dv = I * prev.kz * (s.a - s.b) * prev.weight / cur.weight;
    const cplx a = 0.5 * (v + dv / (I * cur.kz));
    const cplx b = 0.5 * (v - dv / (I * cur.kz));
    const double m = std::max(std::abs(a), std::abs(b));
    top_[i] = {a / m, b / m, s.log_scale + std::log(m)};
  }

  // psi_bot = exp(+i kz (z - z_total)) in the substrate, carried upward.
  bot_.resize(n);
  bot_[n - 1] = {1.0, 0.0, 0.0};
  for (std::size_t i = n - 1; i-- > 0;) {
    const Region& next = regions_[i + 1];
    const Region& cur = regions_[i];
    const Coef& c = bot_[i + 1];
    const cplx v = c.a + c.b;
    const cplx dv = I * next.kz * (c.a - c.b) * next.weight / cur.weight;
    const cplx a = 0.5 * (v + dv / (I * cur.kz));
    const cplx b = 0.5 * (v - dv / (I * cur.kz));
    const double dz = i == 0 ? 0.0 : -cur.thickness;
    const Shifted s = shift(a, b, c.log_scale, cur.kz, dz);
    const double m = std::max(std::abs(s.a), std::abs(s.b));
    bot_[i] = {s.a / m, s.b / m, s.log_scale + std::log(m)};
  }
}

std::size_t GreensFunction1D::region_of(double z) const { return locate(regions_, z); }

void GreensFunction1D::check_domain(double z) const {
  if (!std::isfinite(z) || z < -kDomainPadding_nm || z > total_ + kDomainPadding_nm)
    throw DomainError("z = " + std::to_string(z) + " nm lies outside the computational domain");
}

Scaled GreensFunction1D::eval(const std::vector<Coef>& table, double z) const {
  const std::size_t i = region_of(z);
  const Region& r = regions_[i];
  const Shifted s = shift(table[i].a, table[i].b, table[i].log_scale, r.kz, z - r.z_ref);
  return {s.a + s.b, s.log_scale};
}

cplx GreensFunction1D::operator()(double z, double z_prime) const {
  check_domain(z);
  check_domain(z_prime);
  const double lo = std::min(z, z_prime);
  const double hi = std::max(z, z_prime);
  const Scaled t = psi_top(lo);
  const Scaled b = psi_bot(hi);
  const Region& top = regions_.front();
  const cplx wronskian = 2.0 * I * top.kz * top.weight * bot_.front().a;
  return -t.mantissa * b.mantissa / wronskian * std::exp(t.log_scale + b.log_scale - bot_.front().log_scale);
}

cplx GreensFunction1D::reflection() const { return bot_.front().b / bot_.front().a; }

cplx GreensFunction1D::transmission() const {
  return std::exp(bot_.back().log_scale - bot_.front().log_scale) / bot_.front().a;
}

cplx GreensFunction1D::cavity_field(double z) const {
  // The source must lie above the observation point; any superstrate
  // position gives the same result once its phase is divided out.
  const double zs = std::min(z_src_, z);
  const Region& top = regions_.front();
  return -2.0 * I * top.kz * top.weight * std::exp(I * top.kz * zs) * (*this)(z, zs);
}

cplx GreensFunction1D::electronic_reflectance() const {
  const cplx phase = std::exp(I * kz_top() * z_src_);
  return (cavity_field(z_src_) - phase) * phase;
}

cplx electronic_reflectance(const LayerStack& stack, const ScatterContext& ctx) {
  return GreensFunction1D(stack, ctx).electronic_reflectance();
}

std::vector<FieldSample> cavity_field(const LayerStack& stack, const ScatterContext& ctx, double z_min, double z_max,
                                      double step) {
  if (!(step > 0.0) || !(z_max >= z_min)) throw ConfigError("invalid field grid", "field.step_nm");
  const GreensFunction1D g(stack, ctx);
  std::vector<FieldSample> out;
  const auto n = static_cast<std::size_t>(std::floor((z_max - z_min) / step + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = z_min + static_cast<double>(i) * step;
    out.push_back({z, g.cavity_field(z)});
  }
  return out;
}

ParrattField::ParrattField(const LayerStack& stack, const ScatterContext& ctx) {
  ctx.validate();
  const bool s_pol = ctx.polarization == Polarization::s;

  std::vector<const Material*> mats{&stack.superstrate};
  for (const auto& l : stack.layers) mats.push_back(&l.material);
  mats.push_back(&stack.substrate);

  const std::size_t n = mats.size();
  amps_.resize(n);
  std::vector<cplx> gk(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx eps = mats[i]->permittivity();
    amps_[i].kz = ctx.kz(*mats[i], stack.superstrate);
    amps_[i].z_ref = i == 0 ? 0.0 : (i == n - 1 ? stack.total_thickness_nm() : stack.layers[i - 1].z_top_nm);
    amps_[i].thickness = (i == 0 || i == n - 1) ? 0.0 : stack.layers[i - 1].thickness_nm;
    gk[i] = s_pol ? amps_[i].kz : amps_[i].kz / eps;
  }

  // up/down ratio at the bottom of each region, built from the substrate up
  std::vector<cplx> ratio_bottom(n, 0.0);
  amps_[n - 1].ratio = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    const cplx rf = (gk[i] - gk[i + 1]) / (gk[i] + gk[i + 1]);
    const cplx x = amps_[i + 1].ratio;
    ratio_bottom[i] = (rf + x) / (1.0 + rf * x);
    amps_[i].ratio = ratio_bottom[i] * std::exp(2.0 * I * amps_[i].kz * amps_[i].thickness);
  }
  r_ = amps_[0].ratio;

  amps_[0].down = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const cplx down_bottom = amps_[i].down * std::exp(I * amps_[i].kz * amps_[i].thickness);
    amps_[i + 1].down = down_bottom * (1.0 + ratio_bottom[i]) / (1.0 + amps_[i + 1].ratio);
  }
}

cplx ParrattField::operator()(double z) const {
  std::size_t i = 0;
  if (z >= 0.0) {
    i = amps_.size() - 1;
    for (std::size_t j = 1; j + 1 < amps_.size(); ++j) {
      if (z <= amps_[j].z_ref + amps_[j].thickness) {
        i = j;
        break;
      }
    }
  }
  const Amp& a = amps_[i];
  const double dz = z - a.z_ref;
  return a.down * (std::exp(I * a.kz * dz) + a.ratio * std::exp(-I * a.kz * dz));
}

}  // namespace xcav
