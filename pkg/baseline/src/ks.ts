/**
 * Two-sample Kolmogorov-Smirnov test.
 *
 * The statistic D is the largest gap between the two empirical CDFs;
 * the p-value is the asymptotic Kolmogorov distribution evaluated at
 * z = sqrt(m*n/(m+n)) * D (the classic large-sample approximation,
 * as in CERN ROOT's TMath::KolmogorovProb).
 */

export interface KsResult {
  /** Maximum distance between the two empirical CDFs. */
  statistic: number;
  /** Asymptotic probability of a gap at least this large under H0. */
  pValue: number;
}

/**
 * Survival function of the Kolmogorov distribution: the probability
 * that the scaled statistic exceeds z under the null hypothesis.
 */
export function kolmogorovProb(z: number): number {
  if (z < 0.2) return 1;
  if (z < 0.755) {
    const w = 2.50662827; // sqrt(2*pi)
    const c1 = -1.2337005501361697; // -pi^2/8
    const c2 = -11.103304951225528; // 9*c1
    const c3 = -30.842513753404244; // 25*c1
    const v = 1.0 / (z * z);
    return Math.max(
      0,
      1 - (w * (Math.exp(c1 * v) + Math.exp(c2 * v) + Math.exp(c3 * v))) / z,
    );
  }
  if (z < 6.8116) {
    const fj = [-2, -8, -18, -32];
    const v = z * z;
    let maxj = Math.max(1, Math.round(3.0 / z));
    let p = 0;
    for (let j = 0; j < Math.min(maxj, 4); j++) {
      const sign = j % 2 === 0 ? 1 : -1;
      p += sign * Math.exp(fj[j] * v);
    }
    return Math.min(1, Math.max(0, 2 * p));
  }
  return 0;
}

/**
 * Two-sample KS test over raw samples. Both arrays must be non-empty.
 */
export function ksTest(a: number[], b: number[]): KsResult {
  if (a.length === 0 || b.length === 0) {
    throw new Error("ksTest requires non-empty samples");
  }
  const xs = [...a].sort((p, q) => p - q);
  const ys = [...b].sort((p, q) => p - q);
  const m = xs.length;
  const n = ys.length;
  let i = 0;
  let j = 0;
  let d = 0;
  while (i < m && j < n) {
    const x = xs[i] <= ys[j] ? xs[i] : ys[j];
    while (i < m && xs[i] <= x) i++;
    while (j < n && ys[j] <= x) j++;
    const gap = Math.abs(i / m - j / n);
    if (gap > d) d = gap;
  }
  const z = Math.sqrt((m * n) / (m + n)) * d;
  return { statistic: d, pValue: kolmogorovProb(z) };
}
