#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hardyheat {

/// Computational coordinates: 1 entry for intervals and radial reductions,
/// 2 for rectangles and discs.
using Point = std::vector<double>;

enum class ShapeKind { interval, rectangle, disc, radial_ball };

enum class StratumGeometry { full_boundary, point };

/// Boundary stratum of codimension k with a closed-form distance function.
struct Stratum {
  int codim = 1;
  StratumGeometry geometry = StratumGeometry::full_boundary;
  Point location;  // point strata only
  std::string label;
};

enum class PieceKind { endpoint, face, circle, sphere, point };

/// Connected component of a stratum. Distances to single pieces are what the
/// ground-state lift and the exponent fits consume.
struct Piece {
  PieceKind kind = PieceKind::endpoint;
  int stratum = 0;
  int axis = 0;
  bool at_upper = false;
  Point location;
  std::string label;
};

enum class BallKind { euclidean, deformed_cube };

struct BallSpec {
  Point center;
  double radius = 0.0;
  BallKind kind = BallKind::euclidean;
  int governing_piece = -1;  // deformed cubes only
  double gamma = 1.5;
};

/// Bounded domain whose boundary splits into strata of several codimensions.
/// Supports the shapes with closed-form stratum distances: interval,
/// axis-aligned rectangle, disc and punctured disc, radial ball (an
/// n-dimensional ball reduced to its radial coordinate).
class StratifiedDomain {
 public:
  static StratifiedDomain interval(double a, double b);
  static StratifiedDomain rectangle(std::vector<double> widths);
  static StratifiedDomain disc(double radius, bool punctured);
  static StratifiedDomain radial_ball(double radius, int ambient_n, bool punctured);

  ShapeKind shape() const { return shape_; }
  int dimension() const { return dim_; }           // computational
  int ambient_dimension() const { return ambient_n_; }
  double localization_beta() const { return beta_; }
  void set_localization_beta(double b);
  double gamma() const { return gamma_; }
  void set_gamma(double g);

  const std::vector<Stratum>& strata() const { return strata_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::vector<int> pieces_of_stratum(int stratum) const;
  int stratum_of_codim(int codim) const;  // -1 if absent

  // interval endpoints / rectangle widths / radius, as applicable
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double radius() const { return radius_; }

  bool interior(const Point& x) const;

  /// d_k(x): distance to the stratum of codimension k. NoSuchStratum /
  /// OutsideDomain on bad input.
  double distance(int codim, const Point& x) const;
  /// d(x) = min_k d_k(x).
  double distance(const Point& x) const;
  double stratum_distance(int stratum_index, const Point& x) const;
  double piece_distance(int piece_index, const Point& x) const;

  BallSpec make_ball(const Point& x, double r) const;

  /// V(x,r): integral of prod_k d_k^{2 alpha_k} over ball(x,r) ∩ domain.
  /// alphas indexed like strata(); requires alpha_k > -k/2.
  double weighted_volume(const Point& x, double r, const std::vector<double>& alphas) const;

  double doubling_constant(const std::vector<double>& alphas,
                           const std::vector<std::pair<Point, double>>& samples) const;

 private:
  StratifiedDomain() = default;
  void check_alphas(const std::vector<double>& alphas) const;

  ShapeKind shape_ = ShapeKind::interval;
  int dim_ = 1;
  int ambient_n_ = 1;
  double beta_ = 0.25;
  double gamma_ = 1.5;
  double radius_ = 0.0;
  std::vector<double> lo_, hi_;
  std::vector<Stratum> strata_;
  std::vector<Piece> pieces_;
};

}  // namespace hardyheat
