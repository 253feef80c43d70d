#pragma once

// Straightforward reference implementations used to check the library.
// They favour clarity over speed and share no code with fibertb.

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

namespace oracle {

struct Line {
  double slope;
  double intercept;
  double r_squared;
};

/// Ordinary least squares in long double, two-pass centred sums.
Line least_squares(const std::vector<double>& x, const std::vector<double>& y);

long double mean(const std::vector<double>& v);
/// Unbiased sample variance.
long double variance(const std::vector<double>& v);

/// One-sided PSD of a single segment: periodic Hann, mean removed, direct DFT.
std::vector<double> hann_periodogram(const std::vector<double>& segment, double fs);

/// Averaged periodogram with 50% overlap built on hann_periodogram.
std::vector<double> welch(const std::vector<double>& x, std::size_t segment, double fs);

/// Bitmask words; bit i is slot i.
using Word = std::uint32_t;
int popcount(Word w);
/// All received words reachable from `w` by losing exactly one pulse.
std::set<Word> one_loss_images(Word w);
/// True when no received word is shared by two codewords and no image is itself a codeword.
bool single_loss_unambiguous(const std::vector<Word>& codewords);

/// Probability that a zero-mean Gaussian of std sigma exceeds |threshold|.
double gaussian_two_sided_tail(double threshold, double sigma);

}  // namespace oracle
