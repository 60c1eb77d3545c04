#pragma once

// Growth optimal portfolio (GOP), locally risk-free portfolio (LRP) and
// market extension solvers for an m-asset, n-factor continuous market
// snapshot. All routines are pure functions of a coefficient snapshot.

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bnp/error.hpp"

namespace bnp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultTol = 1e-9;

/// Expected returns (per year) and volatility matrix (per sqrt-year) of m
/// primary security accounts driven by n Brownian motions.
struct MarketCoefficients {
  Vector mu;     // length m
  Matrix sigma;  // m x n

  MarketCoefficients() = default;
  MarketCoefficients(Vector mu_, Matrix sigma_) : mu(std::move(mu_)), sigma(std::move(sigma_)) {
    validate();
  }

  Eigen::Index m() const { return mu.size(); }
  Eigen::Index n() const { return sigma.cols(); }

  void validate() const {
    detail::require(mu.size() >= 1 && sigma.cols() >= 1, Errc::DimensionMismatch,
                    "market needs m >= 1 assets and n >= 1 factors");
    detail::require(sigma.rows() == mu.size(), Errc::DimensionMismatch,
                    "sigma must have one row per asset");
    detail::require(mu.allFinite() && sigma.allFinite(), Errc::DomainError,
                    "market coefficients must be finite");
  }
};

struct GopSolution {
  Vector pi_star;
  double lambda_star = 0.0;
  Vector theta;
  double residual = 0.0;
};

struct LrpSolution {
  Vector pi_lrp;
  double r = 0.0;
};

struct ExtensionInput {
  double alpha = 0.0;
  Vector beta;  // length n
};

enum class ExtensionCase { RedundantDriftMatch, ThreeFund };

struct ExtensionSolution {
  ExtensionCase case_tag = ExtensionCase::RedundantDriftMatch;
  Vector x_star;
  double p_star = 0.0;
  double lambda_2star = 0.0;
  Vector theta_2star;
  Vector pi_2star;  // length m + 1, new account last
};

struct PortfolioDynamics {
  double drift = 0.0;  // per year
  Vector diffusion;    // length n
};

namespace detail {

// Block matrix [[sigma sigma^T, 1], [1^T, 0]] shared by the GOP and the
// extension first-order conditions.
inline Matrix budget_block_matrix(const Matrix& sigma) {
  const Eigen::Index m = sigma.rows();
  Matrix M = Matrix::Zero(m + 1, m + 1);
  M.topLeftCorner(m, m) = sigma * sigma.transpose();
  M.topRightCorner(m, 1).setOnes();
  M.bottomLeftCorner(1, m).setOnes();
  return M;
}

struct LeastSquares {
  Vector z;
  double residual = 0.0;  // max-norm
  bool in_image = false;
};

// Minimum-norm least-squares solve; image membership is decided by
// residual <= tol * (1 + |rhs|_inf).
inline LeastSquares min_norm_solve(const Matrix& M, const Vector& rhs, double tol) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  LeastSquares out;
  out.z = cod.solve(rhs);
  // one step of iterative refinement
  out.z += cod.solve(rhs - M * out.z);
  out.residual = (M * out.z - rhs).lpNorm<Eigen::Infinity>();
  out.in_image = out.z.allFinite() && out.residual <= tol * (1.0 + rhs.lpNorm<Eigen::Infinity>());
  return out;
}

inline void require_weights(const MarketCoefficients& c, const Vector& pi, double tol) {
  require(pi.size() == c.m(), Errc::DimensionMismatch, "weight vector length must equal m");
  require(std::abs(pi.sum() - 1.0) <= tol * (1.0 + pi.cwiseAbs().sum()), Errc::DomainError,
          "portfolio weights must sum to one");
}

}  // namespace detail

/// Solves the GOP block system M (pi*; lambda*) = (mu; 1). Throws NoGop when
/// (mu; 1) is outside the image of M within tol. When M is singular with a
/// consistent right-hand side the minimum-norm solution is returned.
inline GopSolution solve_gop(const MarketCoefficients& coeffs, double tol = kDefaultTol) {
  coeffs.validate();
  detail::require(tol > 0.0, Errc::DomainError, "tol must be positive");
  const Eigen::Index m = coeffs.m();
  const Matrix M = detail::budget_block_matrix(coeffs.sigma);
  Vector rhs(m + 1);
  rhs << coeffs.mu, 1.0;

  const auto ls = detail::min_norm_solve(M, rhs, tol);
  if (!ls.in_image) {
    std::ostringstream os;
    os << "(mu; 1) is not in the image of M (least-squares residual " << ls.residual << ")";
    throw Error(Errc::NoGop, os.str());
  }
  GopSolution sol;
  sol.pi_star = ls.z.head(m);
  sol.lambda_star = ls.z(m);
  sol.theta = coeffs.sigma.transpose() * sol.pi_star;
  sol.residual = ls.residual;
  return sol;
}

/// Drift lambda* + (pi^T sigma) theta and diffusion pi^T sigma of a
/// self-financing portfolio. Throws InconsistentMarket when
/// lambda* != pi^T mu - pi^T sigma theta for the supplied GOP.
inline PortfolioDynamics portfolio_sde(const MarketCoefficients& coeffs, const GopSolution& gop,
                                       const Vector& pi, double tol = kDefaultTol) {
  coeffs.validate();
  detail::require_weights(coeffs, pi, tol);
  detail::require(gop.theta.size() == coeffs.n(), Errc::DimensionMismatch,
                  "theta length must equal n");
  PortfolioDynamics out;
  out.diffusion = coeffs.sigma.transpose() * pi;
  const double implied_lambda = pi.dot(coeffs.mu) - out.diffusion.dot(gop.theta);
  const double scale = 1.0 + std::abs(gop.lambda_star) + std::abs(pi.dot(coeffs.mu));
  if (std::abs(implied_lambda - gop.lambda_star) > tol * scale) {
    std::ostringstream os;
    os << "pi^T mu - pi^T sigma theta = " << implied_lambda << " but lambda* = " << gop.lambda_star;
    throw Error(Errc::InconsistentMarket, os.str());
  }
  out.drift = gop.lambda_star + out.diffusion.dot(gop.theta);
  return out;
}

/// Volatility u = pi^T sigma - theta^T of the GOP-denominated portfolio,
/// which is driftless.
inline Vector benchmarked_volatility(const MarketCoefficients& coeffs, const GopSolution& gop,
                                     const Vector& pi, double tol = kDefaultTol) {
  coeffs.validate();
  detail::require_weights(coeffs, pi, tol);
  detail::require(gop.theta.size() == coeffs.n(), Errc::DimensionMismatch,
                  "theta length must equal n");
  return coeffs.sigma.transpose() * pi - gop.theta;
}

/// g = pi^T mu - 1/2 pi^T sigma sigma^T pi.
inline double instantaneous_growth_rate(const MarketCoefficients& coeffs, const Vector& pi,
                                        double tol = kDefaultTol) {
  coeffs.validate();
  detail::require_weights(coeffs, pi, tol);
  const Vector vol = coeffs.sigma.transpose() * pi;
  return pi.dot(coeffs.mu) - 0.5 * vol.squaredNorm();
}

/// Locally risk-free portfolio from the kernel of sigma^T. The kernel vector
/// chosen is the projection of the ones-vector onto ker(sigma^T), which
/// maximizes |1^T k| over unit kernel vectors.
inline LrpSolution solve_lrp(const MarketCoefficients& coeffs, double tol = kDefaultTol) {
  coeffs.validate();
  detail::require(tol > 0.0, Errc::DomainError, "tol must be positive");
  const Eigen::Index m = coeffs.m();
  const Matrix st = coeffs.sigma.transpose();  // n x m
  Eigen::JacobiSVD<Matrix> svd(st, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * largest) ++rank;
  }
  if (rank == m) throw Error(Errc::NoLrp, "sigma^T has a trivial kernel");

  const Matrix kernel = svd.matrixV().rightCols(m - rank);
  const Vector ones = Vector::Ones(m);
  const Vector k = kernel * (kernel.transpose() * ones);
  const double k_dot_ones = k.sum();
  if (std::sqrt(std::abs(k_dot_ones)) <= tol * std::sqrt(static_cast<double>(m))) {
    throw Error(Errc::NoLrp, "every kernel vector of sigma^T is orthogonal to the ones-vector");
  }
  LrpSolution sol;
  sol.pi_lrp = k / k_dot_ones;
  sol.r = sol.pi_lrp.dot(coeffs.mu);
  return sol;
}

/// GOP of the market extended by one account with drift alpha and
/// volatility beta (three-fund separation).
inline ExtensionSolution extend_market(const MarketCoefficients& coeffs, const GopSolution& gop,
                                       const ExtensionInput& ext, double tol = kDefaultTol) {
  coeffs.validate();
  const Eigen::Index m = coeffs.m();
  const Eigen::Index n = coeffs.n();
  detail::require(ext.beta.size() == n, Errc::DimensionMismatch, "beta length must equal n");
  detail::require(gop.pi_star.size() == m && gop.theta.size() == n, Errc::DimensionMismatch,
                  "gop does not match the market dimensions");
  detail::require(std::isfinite(ext.alpha) && ext.beta.allFinite(), Errc::DomainError,
                  "extension coefficients must be finite");

  ExtensionSolution sol;
  const double excess = ext.alpha - gop.lambda_star - ext.beta.dot(gop.theta);
  if (std::abs(excess) <= tol * (1.0 + std::abs(ext.alpha))) {
    sol.case_tag = ExtensionCase::RedundantDriftMatch;
    sol.x_star = Vector::Zero(m);
    sol.p_star = 0.0;
    sol.lambda_2star = gop.lambda_star;
    sol.theta_2star = gop.theta;
    sol.pi_2star = Vector::Zero(m + 1);
    sol.pi_2star.head(m) = gop.pi_star;
    return sol;
  }

  const Matrix M = detail::budget_block_matrix(coeffs.sigma);
  Vector rhs(m + 1);
  rhs << coeffs.sigma * ext.beta, 1.0;
  const auto ls = detail::min_norm_solve(M, rhs, tol);
  if (!ls.in_image) {
    throw Error(Errc::NoExtendedGop,
                "alpha != lambda* + beta^T theta and (sigma beta; 1) is not in the image of M");
  }
  const Vector x = ls.z.head(m);
  const Vector unhedged = ext.beta - coeffs.sigma.transpose() * x;
  const double q = unhedged.squaredNorm();
  if (q <= tol) {
    throw Error(Errc::Degenerate,
                "beta is replicable by the original market but the drift condition fails");
  }
  sol.case_tag = ExtensionCase::ThreeFund;
  sol.x_star = x;
  sol.p_star = excess / q;
  sol.lambda_2star = gop.lambda_star - sol.p_star * unhedged.dot(coeffs.sigma.transpose() * x);
  sol.theta_2star = gop.theta + sol.p_star * unhedged;
  sol.pi_2star.resize(m + 1);
  sol.pi_2star.head(m) = gop.pi_star - sol.p_star * x;
  sol.pi_2star(m) = sol.p_star;
  return sol;
}

// Plain-text snapshot: one row per asset, "mu sigma_1 ... sigma_n".
inline MarketCoefficients read_market(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw Error(Errc::ParseError, "bad number in market row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  detail::require(!rows.empty(), Errc::DimensionMismatch, "empty market file");
  const std::size_t width = rows.front().size();
  detail::require(width >= 2, Errc::DimensionMismatch, "each row needs mu and at least one sigma");
  Vector mu(static_cast<Eigen::Index>(rows.size()));
  Matrix sigma(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail::require(rows[i].size() == width, Errc::DimensionMismatch, "ragged market rows");
    mu(i) = rows[i][0];
    for (std::size_t j = 1; j < width; ++j) sigma(i, j - 1) = rows[i][j];
  }
  return MarketCoefficients(std::move(mu), std::move(sigma));
}

inline void write_market(std::ostream& out, const MarketCoefficients& c) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < c.m(); ++i) {
    out << c.mu(i);
    for (Eigen::Index j = 0; j < c.n(); ++j) out << ' ' << c.sigma(i, j);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace bnp
