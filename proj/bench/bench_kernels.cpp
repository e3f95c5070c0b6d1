// Serial vs OpenMP timings for the hot kernels. Not part of the test suite.
#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "mvcca/kernels.hpp"
#include "mvcca/prior.hpp"
#include "mvcca/views.hpp"

using namespace mvcca;

namespace {

double time_it(const std::function<void()>& fn, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < reps; ++k) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / reps;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name, 1e3 * serial, 1e3 * parallel,
              serial / parallel);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  const Eigen::Index n = 200'000, d = 8;
  const Eigen::MatrixXd x = sample_standardized(PriorSpec::gaussian(), n, d, {1, 1});
  const Eigen::MatrixXd y = sample_standardized(PriorSpec::gaussian(), n, d, {1, 2});

  report("cross covariance", time_it([&] { kernels::serial::centered_cross_covariance(x, y); }, 5),
         time_it([&] { kernels::omp::centered_cross_covariance(x, y); }, 5));
  report("column means", time_it([&] { kernels::serial::column_means(x); }, 20),
         time_it([&] { kernels::omp::column_means(x); }, 20));

  const auto spec = views::random_map_spec(d, {1, 3});
  report("apply_generator", time_it([&] { views::serial::apply_generator(spec, x); }, 3),
         time_it([&] { views::apply_generator(spec, x); }, 3));
  const Eigen::MatrixXd obs = views::apply_generator(spec, x);
  report("oracle_encode", time_it([&] { views::serial::oracle_encode(spec, obs); }, 2),
         time_it([&] { views::oracle_encode(spec, obs); }, 2));
  return 0;
}
