#pragma once

namespace cadens {

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal density.
double norm_pdf(double x);

// Inverse standard normal CDF (Wichura's PPND16 algorithm, accurate to
// about 1e-15 over the full open unit interval).
double norm_ppf(double p);

}  // namespace cadens
