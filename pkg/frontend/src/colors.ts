/** Visual encoding defaults (see README): senses get fixed saturated colors,
 * unlabeled points take a muted hue derived from their cluster id. */

const SENSE_PALETTE = [
  "#e41a1c",
  "#377eb8",
  "#4daf4a",
  "#984ea3",
  "#ff7f00",
  "#a65628",
  "#f781bf",
  "#17becf",
];

export function senseColor(senseIds: string[], senseId: string): string {
  const idx = senseIds.indexOf(senseId);
  return SENSE_PALETTE[(idx >= 0 ? idx : senseIds.length) % SENSE_PALETTE.length];
}

export function clusterColor(cluster: number): string {
  const hue = (cluster * 67) % 360;
  return `hsl(${hue}, 28%, 72%)`;
}
