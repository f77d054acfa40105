#pragma once

#include <array>

namespace swim {

/// Symmetric 6-point triangle rule, exact through degree 4.  Points are
/// barycentric; weights sum to 1/2 (the reference-triangle area), so a
/// physical integral is  sum_q w[q] * |det J| * f(x_q).
struct TriQuadrature {
  static constexpr int n = 6;
  std::array<std::array<double, 3>, n> bary;
  std::array<double, n> w;

  static const TriQuadrature& degree4() {
    static const TriQuadrature rule = [] {
      TriQuadrature q{};
      const double a1 = 0.445948490915965, w1 = 0.223381589678011 / 2.0;
      const double a2 = 0.091576213509771, w2 = 0.109951743655322 / 2.0;
      int k = 0;
      for (int i = 0; i < 3; ++i) {
        std::array<double, 3> b{a1, a1, a1};
        b[i] = 1.0 - 2.0 * a1;
        q.bary[k] = b;
        q.w[k++] = w1;
      }
      for (int i = 0; i < 3; ++i) {
        std::array<double, 3> b{a2, a2, a2};
        b[i] = 1.0 - 2.0 * a2;
        q.bary[k] = b;
        q.w[k++] = w2;
      }
      return q;
    }();
    return rule;
  }
};

/// 3-point Gauss rule on [0,1], exact through degree 5.  A physical edge
/// integral is  sum_q w[q] * |edge| * f(x_q).
struct EdgeQuadrature {
  static constexpr int n = 3;
  std::array<double, n> t;
  std::array<double, n> w;

  static const EdgeQuadrature& degree5() {
    static const EdgeQuadrature rule = [] {
      EdgeQuadrature q{};
      const double s = std::sqrt(0.6);
      q.t = {0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s)};
      q.w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      return q;
    }();
    return rule;
  }
};

}  // namespace swim
