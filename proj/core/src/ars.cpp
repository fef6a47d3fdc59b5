#include "qjm/ars.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "qjm/error.hpp"

namespace qjm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear piece of the upper hull: u(x) = value + slope * (x - anchor) on [a, b].
struct Piece {
  double a;
  double b;
  double anchor;
  double value;
  double slope;

  double at(double x) const { return value + slope * (x - anchor); }
};

struct HullPoint {
  double x;
  double h;
  double d;  // derivative, NaN in secant mode
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

double log_mass(const Piece& p) {
  if (std::isinf(p.a)) return p.at(p.b) - std::log(p.slope);
  if (std::isinf(p.b)) return p.at(p.a) - std::log(-p.slope);
  const double len = p.b - p.a;
  if (len <= 0.0) return -kInf;
  const double sl = p.slope * len;
  if (std::abs(sl) < 1e-12) return p.at(p.a) + std::log(len);
  if (p.slope > 0.0) return p.at(p.b) + std::log(-std::expm1(-sl) / p.slope);
  return p.at(p.a) + std::log(-std::expm1(sl) / -p.slope);
}

double sample_piece(const Piece& p, double u) {
  double x;
  if (std::isinf(p.a)) {
    x = p.b + std::log(u) / p.slope;
  } else if (std::isinf(p.b)) {
    x = p.a + std::log(u) / p.slope;
  } else {
    const double len = p.b - p.a;
    const double sl = p.slope * len;
    if (std::abs(sl) < 1e-12) {
      x = p.a + u * len;
    } else if (p.slope > 0.0) {
      x = p.b + std::log(u + (1.0 - u) * std::exp(-sl)) / p.slope;
    } else {
      x = p.a + std::log(u + (1.0 - u) * std::exp(sl)) / p.slope;
    }
  }
  return std::clamp(x, p.a, p.b);
}

class Hull {
 public:
  Hull(const LogConcaveTarget& target, const ArsOptions& options)
      : target_(target), options_(options), tangent_(target.has_derivative()) {}

  void add_initial(std::span<const double> xs) {
    const std::size_t min_points = tangent_ ? 2 : 3;
    if (xs.size() < min_points) {
      throw ArsError("need at least " + std::to_string(min_points) + " starting abscissae",
                     std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      if (!(x > target_.lower && x < target_.upper)) {
        throw ArsError("starting abscissa outside the support: " + fmt(x), x);
      }
      if (i > 0 && !(x > xs[i - 1])) {
        throw ArsError("starting abscissae must be strictly increasing", x);
      }
      const HullPoint p = evaluate(x);
      if (!std::isfinite(p.h) || (tangent_ && !std::isfinite(p.d))) {
        throw ArsError("log density not finite at starting abscissa " + fmt(x), x);
      }
      points_.push_back(p);
    }
    for (std::size_t i = 1; i + 1 < points_.size(); ++i) check_triple(i);
    if (tangent_) {
      for (std::size_t i = 0; i + 1 < points_.size(); ++i) check_tangents(i);
    }
    rebuild();
  }

  HullPoint evaluate(double x) const {
    HullPoint p{x, target_.log_density(x), std::numeric_limits<double>::quiet_NaN()};
    if (tangent_) p.d = target_.derivative(x);
    if (std::isnan(p.h)) throw ArsError("log density is NaN at " + fmt(x), x);
    return p;
  }

  const std::vector<Piece>& pieces() const { return pieces_; }

  // Chord between the neighbouring abscissae; -inf outside [x_0, x_{k-1}].
  double squeeze(double x) const {
    if (x < points_.front().x || x > points_.back().x) return -kInf;
    auto it = std::upper_bound(points_.begin(), points_.end(), x,
                               [](double v, const HullPoint& p) { return v < p.x; });
    if (it == points_.end()) return points_.back().h;
    const HullPoint& right = *it;
    const HullPoint& left = *(it - 1);
    const double t = (x - left.x) / (right.x - left.x);
    return left.h + t * (right.h - left.h);
  }

  void check_above_hull(const HullPoint& p, double upper) const {
    if (p.h > upper + options_.concavity_tolerance * (1.0 + std::abs(upper))) {
      throw ArsError("log density is not concave: value " + fmt(p.h) +
                         " exceeds the upper hull " + fmt(upper) + " at " + fmt(p.x),
                     p.x);
    }
  }

  void insert(const HullPoint& p) {
    if (!std::isfinite(p.h) || (tangent_ && !std::isfinite(p.d))) return;
    auto it = std::lower_bound(points_.begin(), points_.end(), p.x,
                               [](const HullPoint& q, double v) { return q.x < v; });
    if (it != points_.end() && it->x == p.x) return;
    const std::size_t i = static_cast<std::size_t>(it - points_.begin());
    points_.insert(it, p);
    for (std::size_t j = (i > 0 ? i - 1 : 0); j <= i + 1 && j < points_.size(); ++j) {
      if (j >= 1 && j + 1 < points_.size()) check_triple(j);
    }
    if (tangent_) {
      if (i > 0) check_tangents(i - 1);
      if (i + 1 < points_.size()) check_tangents(i);
    }
    rebuild();
  }

 private:
  double tol(double a, double b, double c = 0.0) const {
    return options_.concavity_tolerance *
           (1.0 + std::max({std::abs(a), std::abs(b), std::abs(c)}));
  }

  // Middle point must not fall below the chord of its neighbours.
  void check_triple(std::size_t j) const {
    const HullPoint& l = points_[j - 1];
    const HullPoint& m = points_[j];
    const HullPoint& r = points_[j + 1];
    const double t = (m.x - l.x) / (r.x - l.x);
    const double chord = l.h + t * (r.h - l.h);
    if (m.h < chord - tol(l.h, m.h, r.h)) {
      throw ArsError("log density is not concave: chord lies above the function at " +
                         fmt(m.x),
                     m.x);
    }
  }

  // Each point lies below the neighbour's tangent.
  void check_tangents(std::size_t j) const {
    const HullPoint& l = points_[j];
    const HullPoint& r = points_[j + 1];
    const double from_left = l.h + l.d * (r.x - l.x);
    const double from_right = r.h + r.d * (l.x - r.x);
    if (r.h > from_left + tol(r.h, from_left) || l.h > from_right + tol(l.h, from_right)) {
      throw ArsError("log density is not concave: tangent lies below the function near " +
                         fmt(r.x),
                     r.x);
    }
  }

  void rebuild() {
    pieces_.clear();
    if (tangent_) {
      build_tangent();
    } else {
      build_secant();
    }
  }

  void build_tangent() {
    const std::size_t k = points_.size();
    if (std::isinf(target_.lower) && !(points_.front().d > 0.0)) {
      throw ArsError("leftmost abscissa does not lie left of the mode", points_.front().x);
    }
    if (std::isinf(target_.upper) && !(points_.back().d < 0.0)) {
      throw ArsError("rightmost abscissa does not lie right of the mode", points_.back().x);
    }
    double left = target_.lower;
    for (std::size_t j = 0; j < k; ++j) {
      const HullPoint& p = points_[j];
      double right = target_.upper;
      if (j + 1 < k) {
        const HullPoint& q = points_[j + 1];
        const double dd = p.d - q.d;
        if (dd > 1e-12 * (1.0 + std::abs(p.d) + std::abs(q.d))) {
          right = (q.h - p.h - q.x * q.d + p.x * p.d) / dd;
        } else {
          right = 0.5 * (p.x + q.x);
        }
        right = std::clamp(right, p.x, q.x);
      }
      pieces_.push_back({left, right, p.x, p.h, p.d});
      left = right;
    }
  }

  void build_secant() {
    const std::size_t k = points_.size();
    auto line = [&](std::size_t j) {
      const HullPoint& p = points_[j];
      const HullPoint& q = points_[j + 1];
      return Piece{0.0, 0.0, p.x, p.h, (q.h - p.h) / (q.x - p.x)};
    };
    const Piece first = line(0);
    const Piece last = line(k - 2);
    if (std::isinf(target_.lower) && !(first.slope > 0.0)) {
      throw ArsError("leftmost abscissae do not lie left of the mode", points_.front().x);
    }
    if (std::isinf(target_.upper) && !(last.slope < 0.0)) {
      throw ArsError("rightmost abscissae do not lie right of the mode", points_.back().x);
    }
    auto push = [&](Piece p, double a, double b) {
      if (b > a || std::isinf(a) || std::isinf(b)) {
        p.a = a;
        p.b = b;
        pieces_.push_back(p);
      }
    };
    push(first, target_.lower, points_.front().x);
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const double a = points_[j].x;
      const double b = points_[j + 1].x;
      const bool has_prev = j >= 1;
      const bool has_next = j + 2 <= k - 1;
      if (has_prev && has_next) {
        const Piece lp = line(j - 1);
        const Piece ln = line(j + 1);
        const double ds = lp.slope - ln.slope;
        double z;
        if (ds > 1e-12 * (1.0 + std::abs(lp.slope) + std::abs(ln.slope))) {
          // lp.at(z) == ln.at(z)
          z = (ln.value - lp.value + lp.slope * lp.anchor - ln.slope * ln.anchor) / ds;
        } else {
          z = lp.at(a) <= ln.at(a) ? b : a;
        }
        z = std::clamp(z, a, b);
        push(lp, a, z);
        push(ln, z, b);
      } else if (has_prev) {
        push(line(j - 1), a, b);
      } else {
        push(line(j + 1), a, b);
      }
    }
    push(last, points_.back().x, target_.upper);
  }

  const LogConcaveTarget& target_;
  const ArsOptions& options_;
  bool tangent_;
  std::vector<HullPoint> points_;
  std::vector<Piece> pieces_;
};

}  // namespace

double ars_sample(const LogConcaveTarget& target, std::span<const double> init_abscissae,
                  RngStream& rng, const ArsOptions& options) {
  if (!target.log_density) throw ArsError("target has no log density", 0.0);
  Hull hull(target, options);
  hull.add_initial(init_abscissae);

  std::vector<double> log_masses;
  for (int refinement = 0; refinement <= options.max_refinements; ++refinement) {
    const auto& pieces = hull.pieces();
    log_masses.resize(pieces.size());
    double top = -kInf;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      log_masses[i] = log_mass(pieces[i]);
      top = std::max(top, log_masses[i]);
    }
    if (!std::isfinite(top)) throw ArsError("upper hull has no finite mass", 0.0);
    double total = 0.0;
    for (double& m : log_masses) {
      m = std::exp(m - top);
      total += m;
    }
    double pick = rng.uniform() * total;
    std::size_t chosen = pieces.size() - 1;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (pick < log_masses[i]) {
        chosen = i;
        break;
      }
      pick -= log_masses[i];
    }
    const Piece& piece = pieces[chosen];
    const double x = sample_piece(piece, rng.uniform());
    const double upper = piece.at(x);
    const double log_u = std::log(rng.uniform());

    if (log_u <= hull.squeeze(x) - upper) return x;
    const HullPoint p = hull.evaluate(x);
    hull.check_above_hull(p, upper);
    if (log_u <= p.h - upper) return x;
    hull.insert(p);
  }
  throw ArsError("maximum number of hull refinements exceeded", 0.0);
}

std::vector<double> bracket_mode(const LogConcaveTarget& target, double guess, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ArsError("bracket step must be positive", guess);
  double centre = guess;
  if (!(centre > target.lower && centre < target.upper)) {
    if (std::isfinite(target.lower) && std::isfinite(target.upper)) {
      centre = 0.5 * (target.lower + target.upper);
    } else if (std::isfinite(target.lower)) {
      centre = target.lower + step;
    } else {
      centre = target.upper - step;
    }
  }
  double hc = target.log_density(centre);
  if (!std::isfinite(hc)) throw ArsError("log density not finite at the mode guess", centre);

  constexpr int kMaxSteps = 200;
  auto search = [&](double direction, double bound) {
    double s = step;
    for (int i = 0; i < kMaxSteps; ++i) {
      double x = centre + direction * s;
      const bool hits_bound = std::isfinite(bound) && direction * (x - bound) >= 0.0;
      if (hits_bound) x = 0.5 * (centre + bound);
      const double hx = target.log_density(x);
      if (std::isnan(hx)) throw ArsError("log density is NaN", x);
      if (!std::isfinite(hx)) {
        s *= 0.5;
        if (!(s > 0.0)) break;
        continue;
      }
      // a bounded side needs no slope sign at its outermost point
      if (hits_bound || hx < hc) return x;
      centre = x;
      hc = hx;
      s *= 2.0;
    }
    throw ArsError("could not bracket the mode of the log density", centre);
  };
  const double right = search(1.0, target.upper);
  const double left = search(-1.0, target.lower);
  return {left, centre, right};
}

double local_scale(const LogConcaveTarget& target, double x) {
  const double delta = 1e-4 * std::max(1.0, std::abs(x));
  double curvature;
  if (target.has_derivative()) {
    curvature = -(target.derivative(x + delta) - target.derivative(x - delta)) / (2.0 * delta);
  } else {
    curvature = -(target.log_density(x + delta) - 2.0 * target.log_density(x) +
                  target.log_density(x - delta)) /
                (delta * delta);
  }
  if (!(curvature > 0.0) || !std::isfinite(curvature)) return 1.0;
  return std::clamp(1.0 / std::sqrt(curvature), 1e-8, 1e4);
}

double ars_draw_near(const LogConcaveTarget& target, double guess, RngStream& rng,
                     const ArsOptions& options) {
  double step = 1.0;
  if (guess - 1e-4 * std::max(1.0, std::abs(guess)) > target.lower &&
      guess + 1e-4 * std::max(1.0, std::abs(guess)) < target.upper) {
    step = local_scale(target, guess);
  }
  const std::vector<double> xs = bracket_mode(target, guess, step);
  return ars_sample(target, xs, rng, options);
}

}  // namespace qjm
