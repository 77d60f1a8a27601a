#include "dephasim/observables.hpp"

#include <cmath>
#include <string>

#include "dephasim/errors.hpp"
#include "dephasim/lattice.hpp"

namespace dephasim {

namespace {

std::vector<double> row(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

}  // namespace

double second_moment(std::span<const double> populations, double j0) {
  double w = 0.0;
  for (std::size_t j = 0; j < populations.size(); ++j) {
    const double dx = centered_position(j, populations.size()) - j0;
    w += dx * dx * populations[j];
  }
  return w;
}

double centroid(std::span<const double> populations) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < populations.size(); ++j) {
    num += centered_position(j, populations.size()) * populations[j];
    den += populations[j];
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<double> integrated_moment(std::span<const double> times, std::span<const double> w) {
  if (times.size() != w.size()) {
    throw SpecificationError("integrated_moment: times and W have different lengths");
  }
  if (times.empty()) return {};
  if (times.front() != 0.0) throw SpecificationError("integrated_moment: time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw SpecificationError("integrated_moment: time grid must be strictly increasing");
    }
  }
  std::vector<double> m(times.size(), 0.0);
  double integral = 0.0;
  double prev = std::sqrt(std::max(w[0] - w[0], 0.0));
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double cur = std::sqrt(std::max(w[k] - w[0], 0.0));
    integral += 0.5 * (prev + cur) * (times[k] - times[k - 1]);
    m[k] = integral / times[k];
    prev = cur;
  }
  return m;
}

Distance distance_function(std::span<const double> populations) {
  if (populations.empty()) throw DataQualityError("distance_function: no populations");
  double sum = 0.0;
  for (double n : populations) sum += n;
  if (!(std::abs(sum - 1.0) <= 1e-3)) {
    throw DataQualityError("populations sum to " + std::to_string(sum) + ", not 1");
  }
  Distance d;
  double entropy_term = 0.0;
  for (double n : populations) {
    if (n < 0.0) {
      ++d.clamped_entries;
      continue;
    }
    if (n > 0.0) entropy_term += n * std::log(n);
  }
  d.value = std::log(static_cast<double>(populations.size())) + entropy_term;
  return d;
}

PowerLawFit fit_spreading_exponent(std::span<const double> times, std::span<const double> m,
                                   FitWindow window) {
  if (times.size() != m.size()) {
    throw SpecificationError("fit: times and M have different lengths");
  }
  if (!(window.end > window.start)) throw SpecificationError("fit: empty window");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < window.start || times[k] > window.end) continue;
    if (!(times[k] > 0.0) || !(m[k] > 0.0)) {
      throw FitDomainError("fit: nonpositive value in window at t = " + std::to_string(times[k]));
    }
    x.push_back(std::log(times[k]));
    y.push_back(std::log(m[k]));
  }
  if (x.size() < 8) {
    throw SpecificationError("fit: window holds " + std::to_string(x.size()) +
                             " grid points, need at least 8");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  PowerLawFit fit;
  fit.points = x.size();
  fit.beta = sxy / sxx;
  const double intercept = my - fit.beta * mx;
  fit.prefactor = std::exp(intercept);
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + fit.beta * x[i]);
    rss += r * r;
  }
  fit.standard_error = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

CrossingReport detect_mpemba_crossing(std::span<const double> times, std::span<const double> a,
                                      std::span<const double> b) {
  if (times.size() != a.size() || times.size() != b.size()) {
    throw SpecificationError("crossing: series lengths differ");
  }
  CrossingReport report;
  if (times.empty()) return report;
  const double d0 = a[0] - b[0];
  if (d0 < 0.0) throw SpecificationError("crossing: series A must start above series B");
  if (d0 == 0.0) return report;

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double prev = a[k - 1] - b[k - 1];
    const double cur = a[k] - b[k];
    if (prev > 0.0 && cur <= 0.0) {
      report.found = true;
      report.time = times[k - 1] + (times[k] - times[k - 1]) * prev / (prev - cur);
      const double step = times[k] - times[k - 1];
      report.sustained = true;
      for (std::size_t q = k; q < times.size(); ++q) {
        if (times[q] < report.time + step - 1e-12 * step) continue;
        if (!(a[q] < b[q])) {
          report.sustained = false;
          break;
        }
      }
      return report;
    }
  }
  return report;
}

ObservableSeries compute_observables(std::span<const double> times, const Eigen::MatrixXd& populations) {
  if (static_cast<std::size_t>(populations.rows()) != times.size()) {
    throw SpecificationError("observables: population rows do not match time grid");
  }
  ObservableSeries s;
  s.times.assign(times.begin(), times.end());
  s.populations = populations;
  if (times.empty()) return s;
  s.j0 = centroid(row(populations, 0));
  s.w.reserve(times.size());
  s.d.reserve(times.size());
  for (Eigen::Index k = 0; k < populations.rows(); ++k) {
    const std::vector<double> n = row(populations, k);
    s.w.push_back(second_moment(n, s.j0));
    const Distance d = distance_function(n);
    s.d.push_back(d.value);
    s.clamped_entries += d.clamped_entries;
  }
  s.m = integrated_moment(times, s.w);
  return s;
}

}  // namespace dephasim
