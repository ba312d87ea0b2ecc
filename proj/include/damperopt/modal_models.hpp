#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "damperopt/error.hpp"
#include "damperopt/trig.hpp"

namespace damperopt {

enum class ModelKind { Chain, String, Rod };

inline const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Chain: return "chain";
    case ModelKind::String: return "string";
    case ModelKind::Rod: return "rod";
  }
  return "?";
}

/// Homogeneous rod material constants (stiffness-of-bending a0, tension k0).
struct RodParams {
  double a0 = 1.0;
  double k0 = 1.0;
};

/// A vibrational system in modal coordinates: M = I, K = diag(ω²).
///
/// Modes are stored 0-based; mode index l in the formulas below is the
/// 1-based number (l = i + 1).
class ModalModel {
 public:
  ModelKind kind() const { return kind_; }
  std::size_t n() const { return omegas_.size(); }
  const RodParams& rod_params() const { return rod_; }

  std::span<const double> omegas() const { return omegas_; }
  std::span<const double> omegas_sq() const { return omegas_sq_; }
  double omega(std::size_t i) const { return omegas_[i]; }
  double omega_sq(std::size_t i) const { return omegas_sq_[i]; }

  /// ω_i² − ω_j² in factored form, free of the cancellation that direct
  /// subtraction suffers for neighbouring modes.
  double omega_sq_gap(std::size_t i, std::size_t j) const {
    const auto l = static_cast<std::int64_t>(i) + 1;
    const auto m = static_cast<std::int64_t>(j) + 1;
    switch (kind_) {
      case ModelKind::Chain: {
        const auto twice_n1 = 2 * (static_cast<std::int64_t>(n()) + 1);
        return 4.0 * sinpi_ratio(l + m, twice_n1) * sinpi_ratio(l - m, twice_n1);
      }
      case ModelKind::String:
        return pi * pi * static_cast<double>((l - m) * (l + m));
      case ModelKind::Rod: {
        const double sq = static_cast<double>(l * l + m * m);
        return pi * pi * static_cast<double>((l - m) * (l + m)) *
               (rod_.k0 + pi * pi * rod_.a0 * sq);
      }
    }
    return omegas_sq_[i] - omegas_sq_[j];
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(n=" << n();
    if (kind_ == ModelKind::Rod) os << ", a0=" << rod_.a0 << ", k0=" << rod_.k0;
    os << ")";
    return os.str();
  }

  friend ModalModel chain_model(std::size_t n);
  friend ModalModel string_model(std::size_t n_modes);
  friend ModalModel rod_model(std::size_t n_modes, double a0, double k0);

 private:
  ModalModel(ModelKind kind, std::vector<double> omegas, RodParams rod = {})
      : kind_(kind), omegas_(std::move(omegas)), rod_(rod) {
    omegas_sq_.reserve(omegas_.size());
    for (double w : omegas_) omegas_sq_.push_back(w * w);
  }

  ModelKind kind_;
  std::vector<double> omegas_;
  std::vector<double> omegas_sq_;
  RodParams rod_;
};

/// Fixed-fixed unit mass-spring chain: ω_l = 2·sin(lπ / (2(n+1))).
inline ModalModel chain_model(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidDimension, "chain needs n >= 1");
  std::vector<double> w(n);
  const double n1 = static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double l = static_cast<double>(i + 1);
    w[i] = 2.0 * std::sin(l * pi / (2.0 * n1));
  }
  return ModalModel(ModelKind::Chain, std::move(w));
}

/// Spectrally truncated string: ω_k = kπ.
inline ModalModel string_model(std::size_t n_modes) {
  if (n_modes == 0) throw Error(ErrorCode::InvalidModel, "string needs at least one mode");
  std::vector<double> w(n_modes);
  for (std::size_t i = 0; i < n_modes; ++i) w[i] = static_cast<double>(i + 1) * pi;
  return ModalModel(ModelKind::String, std::move(w));
}

/// Spectrally truncated homogeneous rod: ω_k = kπ·sqrt(k²π²·a0 + k0).
inline ModalModel rod_model(std::size_t n_modes, double a0 = 1.0, double k0 = 1.0) {
  if (n_modes == 0) throw Error(ErrorCode::InvalidModel, "rod needs at least one mode");
  if (!(a0 >= 0.0) || !std::isfinite(a0)) throw Error(ErrorCode::InvalidModel, "rod a0 must be >= 0");
  if (!(k0 > 0.0) || !std::isfinite(k0)) throw Error(ErrorCode::InvalidModel, "rod k0 must be > 0");
  std::vector<double> w(n_modes);
  for (std::size_t i = 0; i < n_modes; ++i) {
    const double k = static_cast<double>(i + 1);
    w[i] = k * pi * std::sqrt(k * k * pi * pi * a0 + k0);
  }
  return ModalModel(ModelKind::Rod, std::move(w), RodParams{a0, k0});
}

/// Modal damping direction c, so that the damping matrix is C = v·c·cᵀ.
///
/// Entries are kept exactly as produced by the generating formula (no
/// normalisation). Entries with magnitude below 1e-300 are stored as exact
/// zeros and recorded in the zero-mode mask.
class DamperVector {
 public:
  static constexpr double zero_threshold = 1e-300;

  DamperVector(std::vector<double> entries, double position_label)
      : entries_(std::move(entries)), label_(position_label), zero_(entries_.size(), false) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (std::abs(entries_[i]) < zero_threshold) {
        entries_[i] = 0.0;
        zero_[i] = true;
        ++zero_count_;
      }
    }
  }

  std::size_t size() const { return entries_.size(); }
  std::span<const double> entries() const { return entries_; }
  double operator[](std::size_t i) const { return entries_[i]; }
  double position_label() const { return label_; }

  bool is_zero_mode(std::size_t i) const { return zero_[i]; }
  std::size_t zero_mode_count() const { return zero_count_; }
  const std::vector<bool>& zero_modes() const { return zero_; }

  double squared_norm() const {
    double s = 0.0;
    for (double c : entries_) s += c * c;
    return s;
  }

 private:
  std::vector<double> entries_;
  double label_;
  std::vector<bool> zero_;
  std::size_t zero_count_ = 0;
};

/// k-th chain eigenvector, i.e. the unit vector e_k in the modal basis:
/// c_j = sqrt(2/(n+1))·sin(j·k·π/(n+1)). Position label is k/n.
inline DamperVector chain_damper(std::size_t k, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidDimension, "chain needs n >= 1");
  if (k < 1 || k > n) {
    throw Error(ErrorCode::InvalidPosition,
                "chain position " + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  const auto n1 = static_cast<std::int64_t>(n) + 1;
  const double scale = std::sqrt(2.0 / static_cast<double>(n1));
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jk = static_cast<std::int64_t>(j + 1) * static_cast<std::int64_t>(k);
    c[j] = scale * sinpi_ratio(jk, n1);
  }
  return DamperVector(std::move(c), static_cast<double>(k) / static_cast<double>(n));
}

/// Chain damper with the position index made continuous:
/// c_j(z) = sqrt(2/(n+1))·sin(j·z·n·π/(n+1)), 0 < z <= 1.
/// At z = k/n this returns chain_damper(k, n) bit for bit.
inline DamperVector chain_damper_continuous(double z, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidDimension, "chain needs n >= 1");
  if (!(z > 0.0 && z <= 1.0)) {
    throw Error(ErrorCode::InvalidPosition, "continuous chain position must lie in (0, 1]");
  }
  const double t = z * static_cast<double>(n);
  const double k = std::round(t);
  if (k >= 1.0 && std::abs(t - k) <= 4.0 * std::numeric_limits<double>::epsilon() * t) {
    auto grid = chain_damper(static_cast<std::size_t>(k), n);
    return DamperVector(std::vector<double>(grid.entries().begin(), grid.entries().end()), z);
  }
  const double n1 = static_cast<double>(n + 1);
  const double scale = std::sqrt(2.0 / n1);
  std::vector<double> c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = scale * sinpi(static_cast<double>(j + 1) * t / n1);
  return DamperVector(std::move(c), z);
}

/// Point damper at y on the string/rod: c_k = sin(kπy)/sqrt(2).
inline DamperVector string_damper(double y, std::size_t n_modes) {
  if (n_modes == 0) throw Error(ErrorCode::InvalidDimension, "need at least one mode");
  if (!(y > 0.0 && y < 1.0)) throw Error(ErrorCode::InvalidPosition, "string position must lie in (0, 1)");
  std::vector<double> c(n_modes);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t k = 0; k < n_modes; ++k) c[k] = inv_sqrt2 * sinpi(static_cast<double>(k + 1) * y);
  return DamperVector(std::move(c), y);
}

/// ‖c(y)‖² = n/4 − ¼·Re Σ_{k=1..n} e^{2πiky}, with the geometric sum in
/// closed form: Re Σ = cos((n+1)πy)·sin(nπy)/sin(πy).
inline double damper_norm_closed_form(double y, std::size_t n) {
  if (!(y > 0.0 && y < 1.0)) throw Error(ErrorCode::InvalidPosition, "string position must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  const double re = cospi((nn + 1.0) * y) * sinpi(nn * y) / sinpi(y);
  return nn / 4.0 - re / 4.0;
}

/// Symmetric tridiagonal matrix stored by its diagonal and sub-diagonal.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // size n-1

  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  double at(std::size_t i, std::size_t j) const {
    if (i == j) return diag[i];
    if (i + 1 == j) return off[i];
    if (j + 1 == i) return off[j];
    return 0.0;
  }
};

/// Physical-coordinate chain: M = I, K = tridiag(-1, 2, -1).
struct ChainMatrices {
  std::size_t n = 0;
  SymTridiagonal stiffness;

  double mass(std::size_t i, std::size_t j) const { return i == j ? 1.0 : 0.0; }
};

inline ChainMatrices assemble_chain_matrices(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidDimension, "chain needs n >= 1");
  ChainMatrices m;
  m.n = n;
  m.stiffness.diag.assign(n, 2.0);
  m.stiffness.off.assign(n - 1, -1.0);
  return m;
}

/// Number of eigenvalues of t strictly below x (Sturm sequence count).
inline std::size_t sturm_count(const SymTridiagonal& t, double x) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
    q = (t.diag[i] - x) - b2 / q;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

/// All eigenvalues, ascending, by bisection on the Sturm count.
inline std::vector<double> tridiagonal_eigenvalues(const SymTridiagonal& t) {
  const std::size_t n = t.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(t.off[i - 1]);
    if (i + 1 < n) r += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  std::vector<double> eig(n);
  for (std::size_t k = 0; k < n; ++k) {
    double a = lo;
    double b = hi;
    for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(t, mid) > k) {
        b = mid;
      } else {
        a = mid;
      }
    }
    eig[k] = 0.5 * (a + b);
  }
  return eig;
}

}  // namespace damperopt
