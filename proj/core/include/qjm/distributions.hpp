#pragma once

#include <Eigen/Dense>

#include "qjm/rng.hpp"

namespace qjm {

// Random variates used by the samplers. Parameters are validated on every
// call; invalid ones throw std::invalid_argument.

double draw_normal(double mean, double sd, RngStream& rng);

/// Exponential with the given rate (mean 1/rate).
double draw_exponential(double rate, RngStream& rng);

/// Gamma in the shape/rate parametrization, mean shape/rate.
/// Marsaglia-Tsang squeeze; shape < 1 via the U^(1/shape) boost.
double draw_gamma(double shape, double rate, RngStream& rng);

/// Reciprocal of a Gamma(shape, rate) draw.
double draw_inverse_gamma(double shape, double rate, RngStream& rng);

/// Inverse Gaussian (Wald) with mean mu and shape lambda, variance mu^3/lambda.
/// Chi-square transformation with uniform selection between the two roots.
double draw_inverse_gaussian(double mu, double lambda, RngStream& rng);

/// Lower Cholesky factor of a symmetric positive-definite matrix. Throws
/// FactorizationError naming the first non-positive pivot.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                         RngStream& rng);

/// Draw from N(Q^-1 b, Q^-1) given the precision Q and the canonical vector b,
/// without forming Q^-1. This is the shape every Gaussian full conditional
/// takes in the Gibbs sampler.
Eigen::VectorXd draw_mvn_canonical(const Eigen::VectorXd& b, const Eigen::MatrixXd& precision,
                                   RngStream& rng);

/// Wishart(dof, scale) via the Bartlett decomposition; dof > dim - 1.
Eigen::MatrixXd draw_wishart(double dof, const Eigen::MatrixXd& scale, RngStream& rng);

/// Inverse-Wishart(dof, scale): inverse of a Wishart(dof, scale^-1) draw.
/// Mean scale / (dof - dim - 1) when dof > dim + 1.
Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& scale, RngStream& rng);

}  // namespace qjm
