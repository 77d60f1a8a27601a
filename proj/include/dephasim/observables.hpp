#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dephasim {

/// W = sum_j |x_j - j0|^2 n_j with x_j the centered coordinate of site j
/// (x_j = j - (L-1)/2, so the middle site of an odd chain sits at 0).
double second_moment(std::span<const double> populations, double j0);

/// Population-weighted mean of the centered coordinate.
double centroid(std::span<const double> populations);

/// M(t_k) = (1/t_k) * integral_0^t_k sqrt(max(W - W(0), 0)), trapezoidal on
/// the given grid; M(t_0) = 0. The grid must start at 0.
std::vector<double> integrated_moment(std::span<const double> times, std::span<const double> w);

struct Distance {
  double value = 0.0;
  std::size_t clamped_entries = 0;  ///< negative populations set to 0 first
};

/// D = log L + sum_j n_j log n_j (natural log, 0 log 0 = 0). Throws
/// DataQualityError when the populations do not sum to 1 within 1e-3.
Distance distance_function(std::span<const double> populations);

struct FitWindow {
  double start = 0.0;
  double end = 0.0;
};

struct PowerLawFit {
  double beta = 0.0;
  double standard_error = 0.0;
  double prefactor = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log M against log t over the closed window.
PowerLawFit fit_spreading_exponent(std::span<const double> times, std::span<const double> m,
                                   FitWindow window);

struct CrossingReport {
  bool found = false;
  double time = 0.0;      ///< first sign change of A - B, linearly interpolated
  bool sustained = false;  ///< A < B at every grid time from time + one step on
};

/// Detects when series A, starting above B, first drops below it.
CrossingReport detect_mpemba_crossing(std::span<const double> times, std::span<const double> a,
                                      std::span<const double> b);

/// Derived columns for one population history.
struct ObservableSeries {
  std::vector<double> times;
  Eigen::MatrixXd populations;
  std::vector<double> w;
  std::vector<double> m;
  std::vector<double> d;
  double j0 = 0.0;
  std::size_t clamped_entries = 0;
};

/// j0 is the centroid of the t = 0 populations.
ObservableSeries compute_observables(std::span<const double> times, const Eigen::MatrixXd& populations);

}  // namespace dephasim
