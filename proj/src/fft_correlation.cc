// SPDX-License-Identifier: Apache-2.0

#include "crossview/fft_correlation.h"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace crossview {
namespace {

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <typename T>
FftwBuffer<T> Allocate(size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& PlannerMutex() {
  static std::mutex mutex;
  return mutex;
}

const PlanPair& PlansFor(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(PlannerMutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto real = Allocate<double>(n);
  auto spec = Allocate<fftw_complex>(n / 2 + 1);
  PlanPair plans;
  plans.forward =
      fftw_plan_dft_r2c_1d(n, real.get(), spec.get(), FFTW_ESTIMATE);
  plans.inverse =
      fftw_plan_dft_c2r_1d(n, spec.get(), real.get(), FFTW_ESTIMATE);
  return cache.emplace(n, plans).first->second;
}

}  // namespace

CorrelationScores FftCorrelation(const FeatureVolume& aerial,
                                 const FeatureVolume& ground) {
  CheckCorrelationShapes(aerial, ground);
  const int n = aerial.width();
  const int bins = n / 2 + 1;
  const PlanPair& plans = PlansFor(n);

  auto a_real = Allocate<double>(n);
  auto g_real = Allocate<double>(n);
  auto a_spec = Allocate<fftw_complex>(bins);
  auto g_spec = Allocate<fftw_complex>(bins);
  auto acc = Allocate<fftw_complex>(bins);
  for (int k = 0; k < bins; ++k) acc[k][0] = acc[k][1] = 0.0;

  for (int h = 0; h < aerial.height(); ++h) {
    for (int c = 0; c < aerial.channels(); ++c) {
      for (int w = 0; w < n; ++w) {
        a_real[w] = aerial.at(w, h, c);
        g_real[w] = w < ground.width() ? ground.at(w, h, c) : 0.0;
      }
      fftw_execute_dft_r2c(plans.forward, a_real.get(), a_spec.get());
      fftw_execute_dft_r2c(plans.forward, g_real.get(), g_spec.get());
      // corr = IDFT(A * conj(G))
      for (int k = 0; k < bins; ++k) {
        const double ar = a_spec[k][0], ai = a_spec[k][1];
        const double gr = g_spec[k][0], gi = g_spec[k][1];
        acc[k][0] += ar * gr + ai * gi;
        acc[k][1] += ai * gr - ar * gi;
      }
    }
  }
  auto out = Allocate<double>(n);
  fftw_execute_dft_c2r(plans.inverse, acc.get(), out.get());
  CorrelationScores scores(n);
  for (int i = 0; i < n; ++i) scores[i] = out[i] / n;
  return scores;
}

}  // namespace crossview
