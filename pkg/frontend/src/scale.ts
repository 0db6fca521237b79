/** Scales and the min-max normalization used by the heat grids. */

export interface LinearScale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as LinearScale;
  fn.domain = domain;
  return fn;
}

/**
 * Min-max normalization to [0, 1] over the finite entries; a degenerate
 * grid (all finite values equal) maps every cell to the 0.5 midpoint.
 * Non-finite entries come back as null and render hatched.
 */
export function minMaxNormalize(values: Array<number | null>): Array<number | null> {
  const finite = values.filter((v): v is number => v !== null && Number.isFinite(v));
  if (finite.length === 0) {
    return values.map(() => null);
  }
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  return values.map((v) => {
    if (v === null || !Number.isFinite(v)) return null;
    if (hi === lo) return 0.5;
    return (v - lo) / (hi - lo);
  });
}

export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const step = (hi - lo) / (count - 1);
  return Array.from({ length: count }, (_, i) => lo + i * step);
}
