// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_FFT_CORRELATION_H_
#define CROSSVIEW_FFT_CORRELATION_H_

#include "crossview/feature_volume.h"
#include "crossview/matching.h"

namespace crossview {

// Same scores as CyclicCorrelation, computed in the frequency domain: the
// ground volume is zero-padded to W_a and each (h, c) row pair is
// cross-correlated with FFTW; spectra are summed before one inverse.
CorrelationScores FftCorrelation(const FeatureVolume& aerial,
                                 const FeatureVolume& ground);

}  // namespace crossview

#endif  // CROSSVIEW_FFT_CORRELATION_H_
