#include "oracles.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <numbers>

namespace oracle {

long double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

long double variance(const std::vector<double>& v) {
  const long double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<long double>(v.size() - 1);
}

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const long double mx = mean(x);
  const long double my = mean(y);
  long double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const long double b = sxy / sxx;
  const long double a = my - b * mx;
  long double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double r = y[i] - (a + b * x[i]);
    sse += r * r;
  }
  return {static_cast<double>(b), static_cast<double>(a), syy > 0 ? static_cast<double>(1 - sse / syy) : 1.0};
}

std::vector<double> hann_periodogram(const std::vector<double>& segment, double fs) {
  const std::size_t n = segment.size();
  const long double m = mean(segment);
  std::vector<long double> w(n), xw(n);
  long double w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5L - 0.5L * std::cos(2.0L * std::numbers::pi_v<long double> * i / n);
    xw[i] = (segment[i] - m) * w[i];
    w2 += w[i] * w[i];
  }
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    long double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * i % n) / n;
      re += xw[i] * std::cos(a);
      im += xw[i] * std::sin(a);
    }
    long double v = (re * re + im * im) / (fs * w2);
    if (k != 0 && !(n % 2 == 0 && k == n / 2)) v *= 2;
    p[k] = static_cast<double>(v);
  }
  return p;
}

std::vector<double> welch(const std::vector<double>& x, std::size_t segment, double fs) {
  const std::size_t hop = segment / 2;
  std::vector<double> acc(segment / 2 + 1, 0.0);
  std::size_t count = 0;
  for (std::size_t start = 0; start + segment <= x.size(); start += hop) {
    const auto p = hann_periodogram({x.begin() + start, x.begin() + start + segment}, fs);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
    ++count;
  }
  for (auto& a : acc) a /= static_cast<double>(count);
  return acc;
}

int popcount(Word w) { return std::popcount(w); }

std::set<Word> one_loss_images(Word w) {
  std::set<Word> out;
  for (Word bit = 1; bit != 0 && bit <= w; bit <<= 1) {
    if (w & bit) out.insert(w & ~bit);
  }
  return out;
}

bool single_loss_unambiguous(const std::vector<Word>& codewords) {
  const std::set<Word> words(codewords.begin(), codewords.end());
  std::map<Word, Word> owner;
  for (Word c : codewords) {
    for (Word r : one_loss_images(c)) {
      if (words.count(r)) return false;
      const auto [it, fresh] = owner.emplace(r, c);
      if (!fresh && it->second != c) return false;
    }
  }
  return true;
}

double gaussian_two_sided_tail(double threshold, double sigma) {
  return std::erfc(std::abs(threshold) / (sigma * std::numbers::sqrt2));
}

}  // namespace oracle
