#pragma once

namespace caputo_ms {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x), a > 0, x >= 0.
// Series for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// P(a, x1) - P(a, x0) for 0 <= x0 <= x1, without cancellation in the upper tail.
double gamma_p_increment(double a, double x0, double x1);

double beta_fn(double a, double b);

}  // namespace caputo_ms
