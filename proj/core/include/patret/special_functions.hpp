#pragma once

namespace patret {

// Quantile of the standard normal distribution, algorithm AS241 (Wichura,
// 1988), accurate to full double precision. p must lie in (0, 1).
double inverse_normal_cdf(double p);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation with the modified Lentz method. x in [0, 1], a > 0, b > 0.
double regularized_incomplete_beta(double x, double a, double b);

// Two-sided tail probability of Student's t with `dof` degrees of freedom:
// P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2).
double student_t_two_sided_p(double t, double dof);

}  // namespace patret
