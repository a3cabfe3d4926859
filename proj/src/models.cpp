#include "ksmooth/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace ksmooth {

namespace {

constexpr double kPi = std::numbers::pi;

Index ipow(Index base, int e) {
  Index r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

// Per-axis indices of a flat index, axis 0 fastest.
std::array<int, 3> unflatten(Index flat, int N, int n) {
  std::array<int, 3> j{0, 0, 0};
  for (int a = 0; a < n; ++a) {
    j[static_cast<std::size_t>(a)] = static_cast<int>(flat % N);
    flat /= N;
  }
  return j;
}

double japanese(double r2) { return std::sqrt(1.0 + r2); }

}  // namespace

// ---------------------------------------------------------------------------

double GridModel::spacing() const {
  return boundary == Boundary::periodic ? L / N : L / (N + 1);
}

Index GridModel::size() const { return ipow(N, n); }

void GridModel::validate() const {
  std::ostringstream os;
  if (n < 1 || n > 3) os << "grid dimension n = " << n << " outside 1..3";
  else if (N < 8) os << "grid needs N >= 8 points per axis, got " << N;
  else if (!(L > 0.0) || !std::isfinite(L)) os << "grid side length L must be > 0, got " << L;
  else if (size() > cap) os << "grid size N^n = " << size() << " exceeds the cap " << cap;
  const std::string msg = os.str();
  if (!msg.empty()) throw ConfigError("GridModel: " + msg);
}

double GridModel::coordinate(int j) const {
  const double h = spacing();
  return boundary == Boundary::periodic ? -0.5 * L + j * h : -0.5 * L + (j + 1) * h;
}

std::array<double, 3> GridModel::point(Index flat) const {
  const auto j = unflatten(flat, N, n);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < n; ++a) x[static_cast<std::size_t>(a)] = coordinate(j[static_cast<std::size_t>(a)]);
  return x;
}

double GridModel::radius(Index flat) const {
  const auto x = point(flat);
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

double GridModel::cell_volume() const { return std::pow(spacing(), n); }

double continuum_frequency(const GridModel& g, int k) {
  if (g.boundary == Boundary::dirichlet) return kPi * (k + 1) / g.L;
  const int m = k <= g.N / 2 ? k : k - g.N;
  return 2.0 * kPi * m / g.L;
}

double stencil_symbol(const GridModel& g, int k) {
  const double h = g.spacing();
  const double s = g.boundary == Boundary::periodic ? std::sin(kPi * k / g.N)
                                                    : std::sin(kPi * (k + 1) / (2.0 * (g.N + 1)));
  return 4.0 / (h * h) * s * s;
}

// ---------------------------------------------------------------------------

FourierMultiplier::FourierMultiplier(GridModel g, RealVector symbol)
    : grid_(std::move(g)), symbol_(std::move(symbol)) {
  grid_.validate();
  if (symbol_.size() != grid_.size())
    throw ValidationError("FourierMultiplier: symbol length does not match grid size");
  const int N = grid_.N;
  axis_basis_.resize(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      if (grid_.boundary == Boundary::periodic) {
        axis_basis_(j, k) = std::polar(1.0 / std::sqrt(double(N)), 2.0 * kPi * j * k / N);
      } else {
        axis_basis_(j, k) = std::sqrt(2.0 / (N + 1)) * std::sin(kPi * (j + 1) * (k + 1) / (N + 1));
      }
    }
}

Vector FourierMultiplier::transform(const Vector& v, bool adjoint) const {
  if (v.size() != grid_.size()) throw ValidationError("FourierMultiplier: vector has wrong dimension");
  const int N = grid_.N;
  const Matrix op = adjoint ? Matrix(axis_basis_.adjoint()) : axis_basis_;
  Vector out = v;
  Vector line(N);
  const Index total = grid_.size();
  for (int a = 0; a < grid_.n; ++a) {
    const Index stride = ipow(N, a);
    for (Index base = 0; base < total; ++base) {
      if ((base / stride) % N != 0) continue;  // start of a line along axis a
      for (int j = 0; j < N; ++j) line(j) = out(base + j * stride);
      const Vector t = op * line;
      for (int j = 0; j < N; ++j) out(base + j * stride) = t(j);
    }
  }
  return out;
}

Vector FourierMultiplier::forward(const Vector& v) const { return transform(v, true); }
Vector FourierMultiplier::inverse(const Vector& c) const { return transform(c, false); }

Vector FourierMultiplier::apply_diagonal(const Vector& v, const Vector& d) const {
  return inverse(d.cwiseProduct(forward(v)));
}

Vector FourierMultiplier::apply_power(const Vector& v, double exponent) const {
  // Same zero rule as the spectral calculus.
  const double scale = symbol_.cwiseAbs().maxCoeff();
  const double thr = SpectralOperator::kDefaultKernelTolerance * (scale > 0.0 ? scale : 1.0);
  Vector d(symbol_.size());
  for (Index j = 0; j < symbol_.size(); ++j) {
    const double x = symbol_(j);
    if (std::abs(x) <= thr) d(j) = exponent == 0.0 ? 1.0 : 0.0;
    else d(j) = std::pow(x, exponent);
  }
  return apply_diagonal(v, d);
}

Matrix FourierMultiplier::basis() const {
  const Index total = grid_.size();
  Matrix u(total, total);
  for (Index col = 0; col < total; ++col) {
    const auto k = unflatten(col, grid_.N, grid_.n);
    for (Index row = 0; row < total; ++row) {
      const auto j = unflatten(row, grid_.N, grid_.n);
      cplx e = 1.0;
      for (int a = 0; a < grid_.n; ++a)
        e *= axis_basis_(j[static_cast<std::size_t>(a)], k[static_cast<std::size_t>(a)]);
      u(row, col) = e;
    }
  }
  return u;
}

Matrix FourierMultiplier::dense() const {
  const Matrix u = basis();
  return u * symbol_.cast<cplx>().asDiagonal() * u.adjoint();
}

SpectralOperator FourierMultiplier::spectral() const {
  const Index total = grid_.size();
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return symbol_(a) < symbol_(b); });
  const Matrix u = basis();
  RealVector values(total);
  Matrix sorted(total, total);
  for (Index j = 0; j < total; ++j) {
    values(j) = symbol_(order[static_cast<std::size_t>(j)]);
    sorted.col(j) = u.col(order[static_cast<std::size_t>(j)]);
  }
  return SpectralOperator(std::move(values), std::move(sorted));
}

namespace {

// |xi|^2 per flat mode under the given lattice.
RealVector xi_squared(const GridModel& g, Lattice lattice) {
  std::vector<double> axis(static_cast<std::size_t>(g.N));
  for (int k = 0; k < g.N; ++k) {
    const double f = continuum_frequency(g, k);
    axis[static_cast<std::size_t>(k)] = lattice == Lattice::continuum ? f * f : stencil_symbol(g, k);
  }
  RealVector out(g.size());
  for (Index m = 0; m < g.size(); ++m) {
    const auto k = unflatten(m, g.N, g.n);
    double s = 0.0;
    for (int a = 0; a < g.n; ++a) s += axis[static_cast<std::size_t>(k[static_cast<std::size_t>(a)])];
    out(m) = s;
  }
  return out;
}

bool is_even_nonnegative_integer(double x) {
  return x >= 0.0 && std::floor(x) == x && std::fmod(x, 2.0) == 0.0;
}

}  // namespace

FourierMultiplier laplacian_multiplier(const GridModel& g, LaplacianScheme scheme) {
  g.validate();
  return FourierMultiplier(
      g, xi_squared(g, scheme == LaplacianScheme::spectral ? Lattice::continuum : Lattice::stencil));
}

HermitianMatrix build_laplacian(const GridModel& g, LaplacianScheme scheme) {
  g.validate();
  if (scheme == LaplacianScheme::spectral) {
    Matrix m = laplacian_multiplier(g, scheme).dense();
    m = 0.5 * (m + m.adjoint()).eval();
    return HermitianMatrix(std::move(m));
  }
  // Assemble the stencil directly; for Dirichlet grids neighbours outside the
  // box are the zero boundary values.
  const Index total = g.size();
  const double h2 = g.spacing() * g.spacing();
  Matrix m = Matrix::Zero(total, total);
  for (Index x = 0; x < total; ++x) {
    m(x, x) = 2.0 * g.n / h2;
    const auto j = unflatten(x, g.N, g.n);
    for (int a = 0; a < g.n; ++a) {
      const Index stride = ipow(g.N, a);
      const int ja = j[static_cast<std::size_t>(a)];
      if (ja + 1 < g.N) {
        m(x, x + stride) -= 1.0 / h2;
        m(x + stride, x) -= 1.0 / h2;
      } else if (g.boundary == Boundary::periodic) {
        const Index y = x - (g.N - 1) * stride;
        m(x, y) -= 1.0 / h2;
        m(y, x) -= 1.0 / h2;
      }
    }
  }
  return HermitianMatrix(std::move(m));
}

// ---------------------------------------------------------------------------

double symbol_value(const MultiplierSpec& m, double xi2) {
  switch (m.symbol) {
    case SymbolKind::frac_laplacian:
      return xi2 == 0.0 ? (m.exponent == 0.0 ? 1.0 : 0.0) : std::pow(xi2, m.exponent);
    case SymbolKind::abs_power:
      return xi2 == 0.0 ? (m.exponent == 0.0 ? 1.0 : 0.0) : std::pow(xi2, 0.5 * m.exponent);
    case SymbolKind::japanese:
      return std::pow(1.0 + xi2, 0.5 * m.exponent);
  }
  return 0.0;
}

FourierMultiplier multiplier(const GridModel& g, const MultiplierSpec& m) {
  g.validate();
  if (!std::isfinite(m.exponent)) throw ConfigError("MultiplierSpec: exponent must be finite");
  if (m.symbol != SymbolKind::japanese && m.exponent < 0.0)
    throw ConfigError("MultiplierSpec: negative powers of |xi| are singular at xi = 0; use a projection");
  if (g.boundary == Boundary::dirichlet) {
    const double degree = m.symbol == SymbolKind::frac_laplacian ? 2.0 * m.exponent : m.exponent;
    if (!is_even_nonnegative_integer(degree))
      throw ConfigError("MultiplierSpec: Dirichlet grids support only symbols polynomial in |xi|^2");
  }
  const RealVector xi2 = xi_squared(g, m.lattice);
  RealVector sym(xi2.size());
  for (Index k = 0; k < xi2.size(); ++k) sym(k) = symbol_value(m, xi2(k));
  return FourierMultiplier(g, std::move(sym));
}

SpectralOperator build_multiplier(const GridModel& g, const MultiplierSpec& m) {
  return multiplier(g, m).spectral();
}

// ---------------------------------------------------------------------------

RealVector weight_values(const GridModel& g, const WeightSpec& w) {
  g.validate();
  const double h = g.spacing();
  const double r0 = w.r0.value_or(h);
  if (!std::isfinite(w.exponent)) throw ConfigError("WeightSpec: exponent must be finite");
  if (w.kind == WeightKind::homogeneous) {
    if (w.exponent < 0.0 || w.exponent > 4.0)
      throw ConfigError("WeightSpec: homogeneous exponent must lie in [0, 4]");
    if (r0 < h * (1.0 - 1e-12))
      throw ConfigError("WeightSpec: r0 must be at least one grid spacing");
  } else if (std::abs(w.exponent) > 8.0) {
    throw ConfigError("WeightSpec: japanese exponent must satisfy |s| <= 8");
  }
  RealVector out(g.size());
  for (Index x = 0; x < g.size(); ++x) {
    const double r = g.radius(x);
    out(x) = w.kind == WeightKind::homogeneous ? std::pow(std::max(r, r0), -w.exponent)
                                               : std::pow(japanese(r * r), -w.exponent);
  }
  return out;
}

FactorOperator build_weight(const GridModel& g, const WeightSpec& w) {
  return FactorOperator(weight_values(g, w).cast<cplx>().asDiagonal().toDenseMatrix());
}

// ---------------------------------------------------------------------------

InverseSquareModel build_inverse_square(const GridModel& g, double c, double C,
                                        std::optional<double> r0_opt) {
  g.validate();
  if (g.n < 3) throw ConfigError("inverse-square model needs n >= 3");
  const double limit = (g.n - 2) * (g.n - 2) / 4.0;
  if (!(c >= 0.0 && c < limit)) {
    std::ostringstream os;
    os << "inverse-square coupling c = " << c << " outside [0, " << limit << ")";
    throw ConfigError(os.str());
  }
  const double h = g.spacing();
  const double r0 = r0_opt.value_or(h);
  if (r0 < h * (1.0 - 1e-12)) throw ConfigError("inverse-square model: r0 below one grid spacing");

  auto v_of = [&](double r) { return -c / std::pow(std::max(r, r0), 2); };
  Matrix m = build_laplacian(g, LaplacianScheme::finite_difference).entries();
  RealVector pot(g.size());
  bool bounds = true, radial = true;
  const double tol = 1e-12;
  for (Index x = 0; x < g.size(); ++x) {
    const double r = g.radius(x);
    pot(x) = v_of(r);
    m(x, x) += pot(x);
    if (r == 0.0) continue;  // both conditions are vacuous at the origin
    const double r2 = r * r;
    if (pot(x) > C / r2 + tol || pot(x) < -c / r2 - tol) bounds = false;
    // -d_r(r V(r)) by a centred difference of the closed-form profile.
    const double d = 1e-6 * std::max(r, 1.0);
    const double lo = std::max(r - d, 0.0);
    const double deriv = ((r + d) * v_of(r + d) - lo * v_of(lo)) / (r + d - lo);
    if (-deriv < -c / r2 - 1e-6 * (1.0 + c / r2)) radial = false;
  }
  InverseSquareModel out{HermitianMatrix(std::move(m)), std::move(pot), r0, bounds, radial};
  return out;
}

double min_eigenvalue(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------

namespace {

struct Profile {
  std::string name;
  std::map<std::string, double> params;

  double get(const std::string& key, const std::string& which) const {
    auto it = params.find(key);
    if (it == params.end())
      throw ConfigError("field profile '" + which + "': missing parameter '" + key + "'");
    return it->second;
  }
};

Profile parse_profile(const std::string& text, const std::vector<std::string>& allowed_names,
                      const std::map<std::string, std::vector<std::string>>& keys) {
  std::istringstream is(text);
  Profile p;
  if (!(is >> p.name)) throw ConfigError("field profile is empty");
  if (std::find(allowed_names.begin(), allowed_names.end(), p.name) == allowed_names.end())
    throw ConfigError("unknown field profile '" + p.name + "'");
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("field profile '" + p.name + "': expected key=value, got '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const auto& ok = keys.at(p.name);
    if (std::find(ok.begin(), ok.end(), key) == ok.end())
      throw ConfigError("field profile '" + p.name + "': unknown parameter '" + key + "'");
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(tok.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() - eq - 1 || !std::isfinite(value))
      throw ConfigError("field profile '" + p.name + "': bad number in '" + tok + "'");
    p.params[key] = value;
  }
  for (const auto& key : keys.at(p.name)) p.get(key, p.name);
  return p;
}

std::array<double, 3> a_value(const Profile& p, int n, const std::array<double, 3>& x) {
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  if (p.name == "swirl") {
    const double w = p.get("width", "swirl");
    const double g = p.get("amp", "swirl") * std::exp(-r2 / (w * w));
    return {-g * x[1], g * x[0], 0.0};
  }
  if (p.name == "decay") {
    const double mag = p.get("amp", "decay") * std::pow(japanese(r2), -1.0 - p.get("eps0", "decay"));
    const double comp = mag / std::sqrt(double(n));
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) out[static_cast<std::size_t>(a)] = comp;
    return out;
  }
  return {0.0, 0.0, 0.0};
}

double v_value(const Profile& p, const std::array<double, 3>& x) {
  const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  if (p.name == "constant") return p.get("value", "constant");
  if (p.name == "gaussian") {
    const double w = p.get("width", "gaussian");
    return p.get("amp", "gaussian") * std::exp(-r2 / (w * w));
  }
  if (p.name == "decay")
    return p.get("amp", "decay") * std::pow(japanese(r2), -2.0 - p.get("eps0", "decay"));
  return 0.0;
}

}  // namespace

FieldSpec sample_fields(const GridModel& g, const std::string& a_profile,
                        const std::string& v_profile, const DecaySpec& decay) {
  g.validate();
  const Profile ap = parse_profile(a_profile, {"zero", "swirl", "decay"},
                                   {{"zero", {}}, {"swirl", {"amp", "width"}}, {"decay", {"amp", "eps0"}}});
  const Profile vp = parse_profile(
      v_profile, {"zero", "constant", "gaussian", "decay"},
      {{"zero", {}}, {"constant", {"value"}}, {"gaussian", {"amp", "width"}}, {"decay", {"amp", "eps0"}}});
  if (ap.name == "swirl" && g.n < 2) throw ConfigError("field profile 'swirl' needs n >= 2");
  if ((ap.name == "swirl" && !(ap.get("width", "swirl") > 0.0)) ||
      (vp.name == "gaussian" && !(vp.get("width", "gaussian") > 0.0)))
    throw ConfigError("field profile width must be > 0");

  const Index total = g.size();
  const double h = g.spacing();
  FieldSpec f;
  f.a_profile = a_profile;
  f.v_profile = v_profile;
  f.decay = decay;
  f.links.assign(static_cast<std::size_t>(g.n), RealVector::Zero(total));
  f.a_sites.assign(static_cast<std::size_t>(g.n), RealVector::Zero(total));
  f.potential = RealVector::Zero(total);
  for (Index x = 0; x < total; ++x) {
    const auto p = g.point(x);
    const auto a = a_value(ap, g.n, p);
    for (int i = 0; i < g.n; ++i) {
      auto mid = p;
      mid[static_cast<std::size_t>(i)] += 0.5 * h;
      f.links[static_cast<std::size_t>(i)](x) = h * a_value(ap, g.n, mid)[static_cast<std::size_t>(i)];
      f.a_sites[static_cast<std::size_t>(i)](x) = a[static_cast<std::size_t>(i)];
    }
    f.potential(x) = v_value(vp, p);
  }
  return f;
}

DecayCheck check_decay(const GridModel& g, const FieldSpec& f) {
  DecayCheck out;
  for (Index x = 0; x < g.size(); ++x) {
    const auto p = g.point(x);
    const double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    double a2 = 0.0;
    for (const auto& comp : f.a_sites) a2 += comp(x) * comp(x);
    const double lhs = std::sqrt(a2) + japanese(r2) * std::abs(f.potential(x));
    const double rhs = f.decay.C * std::pow(japanese(r2), -1.0 - f.decay.eps0);
    const double ratio = lhs / rhs;
    if (ratio > out.worst_ratio || x == 0) {
      out.worst_ratio = ratio;
      out.worst_index = x;
      out.worst_point = p;
    }
  }
  out.holds = out.worst_ratio <= 1.0;
  return out;
}

FieldSpec gauge_shift(const GridModel& g, const FieldSpec& f, const RealVector& chi) {
  if (chi.size() != g.size()) throw ValidationError("gauge_shift: chi has wrong dimension");
  if (f.links.size() != static_cast<std::size_t>(g.n))
    throw ValidationError("gauge_shift: field has wrong number of link components");
  FieldSpec out = f;
  for (Index x = 0; x < g.size(); ++x) {
    const auto j = unflatten(x, g.N, g.n);
    for (int a = 0; a < g.n; ++a) {
      const Index stride = ipow(g.N, a);
      const Index y = j[static_cast<std::size_t>(a)] + 1 < g.N ? x + stride : x - (g.N - 1) * stride;
      out.links[static_cast<std::size_t>(a)](x) += chi(y) - chi(x);
    }
  }
  out.decay.check = false;
  return out;
}

MagneticModel build_magnetic(const GridModel& g, const FieldSpec& f) {
  g.validate();
  if (g.boundary != Boundary::periodic)
    throw ConfigError("magnetic operator needs a periodic grid");
  const Index total = g.size();
  if (f.links.size() != static_cast<std::size_t>(g.n) || f.potential.size() != total)
    throw ValidationError("build_magnetic: field samples do not match the grid");
  for (const auto& l : f.links)
    if (l.size() != total) throw ValidationError("build_magnetic: link samples do not match the grid");

  MagneticModel out{HermitianMatrix(Matrix::Identity(1, 1)), std::nullopt};
  if (f.decay.check) {
    DecayCheck d = check_decay(g, f);
    if (!d.holds) {
      std::ostringstream os;
      os << "build_magnetic: decay bound fails at x = (" << d.worst_point[0] << ", "
         << d.worst_point[1] << ", " << d.worst_point[2] << "), ratio " << d.worst_ratio;
      throw ValidationError(os.str());
    }
    out.decay = d;
  }

  const double h2 = g.spacing() * g.spacing();
  Matrix m = Matrix::Zero(total, total);
  for (Index x = 0; x < total; ++x) {
    m(x, x) += 2.0 * g.n / h2 + f.potential(x);
    const auto j = unflatten(x, g.N, g.n);
    for (int a = 0; a < g.n; ++a) {
      const Index stride = ipow(g.N, a);
      const Index y = j[static_cast<std::size_t>(a)] + 1 < g.N ? x + stride : x - (g.N - 1) * stride;
      const cplx hop = -std::exp(-kI * f.links[static_cast<std::size_t>(a)](x)) / h2;
      m(x, y) += hop;
      m(y, x) += std::conj(hop);
    }
  }
  out.h = HermitianMatrix(std::move(m));
  return out;
}

}  // namespace ksmooth
