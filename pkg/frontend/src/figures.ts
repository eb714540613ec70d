/** What each figure plots and how its axes read. */

export interface FigureSpec {
  id: string;
  title: string;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  /** x = sweep value, y = metric value; "cdf" flips to x = value, y = sweep. */
  orientation: "sweep" | "cdf";
  /** metrics drawn, in legend order; others in the file are diagnostics */
  selects: (metric: string) => boolean;
  preferredOrder: string[];
}

const spec = (s: FigureSpec) => s;

export const FIGURES: Record<string, FigureSpec> = {
  fig9: spec({
    id: "fig9",
    title: "Tone detection vs per-tone SNR",
    xLabel: "per-tone SNR (dB)",
    yLabel: "erasure / error rate",
    logY: true,
    orientation: "sweep",
    selects: (m) => /^(erasure|error)_ant\d+$/.test(m),
    preferredOrder: [
      "erasure_ant1",
      "erasure_ant2",
      "erasure_ant4",
      "error_ant1",
      "error_ant2",
      "error_ant4",
    ],
  }),
  fig11: spec({
    id: "fig11",
    title: "Coded uplink with discovery-tone overlay",
    xLabel: "data SNR (dB)",
    yLabel: "block error rate",
    logY: true,
    orientation: "sweep",
    selects: (m) => m.startsWith("bler_"),
    preferredOrder: [
      "bler_clean",
      "bler_overlay_punctured",
      "bler_overlay_unpunctured",
    ],
  }),
  fig12: spec({
    id: "fig12",
    title: "Mean discovery time vs device density",
    xLabel: "devices per cell",
    yLabel: "mean discovery time (ms)",
    logY: false,
    orientation: "sweep",
    selects: (m) => m.startsWith("discovery_ms_"),
    preferredOrder: [
      "discovery_ms_tone",
      "discovery_ms_baseline",
      "discovery_ms_csma_cw8",
      "discovery_ms_csma_cw32",
      "discovery_ms_csma_cw128",
    ],
  }),
  fig13: spec({
    id: "fig13",
    title: "Local-pair downlink rate CDF",
    xLabel: "rate (b/s/Hz)",
    yLabel: "CDF (%)",
    logY: false,
    orientation: "cdf",
    selects: (m) => m.startsWith("rate_"),
    preferredOrder: ["rate_cellular", "rate_mode_selected"],
  }),
  fig14: spec({
    id: "fig14",
    title: "Uplink rate CDF, direct vs device relay",
    xLabel: "rate (b/s/Hz)",
    yLabel: "CDF (%)",
    logY: false,
    orientation: "cdf",
    selects: (m) => m.startsWith("rate_"),
    preferredOrder: ["rate_direct", "rate_relay"],
  }),
};

export const FIGURE_IDS = Object.keys(FIGURES);

/** Present metrics in preferred order, then any unexpected extras sorted. */
export function orderedMetrics(spec: FigureSpec, present: Set<string>): string[] {
  const out = spec.preferredOrder.filter((m) => present.has(m));
  const extra = [...present]
    .filter((m) => spec.selects(m) && !spec.preferredOrder.includes(m))
    .sort();
  return out.concat(extra);
}
