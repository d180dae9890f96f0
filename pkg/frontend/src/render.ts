import * as echarts from "echarts";

import { curveBySize, curveCrossing, diagonalCrossing, scalingCurve } from "./analysis.js";
import { ConvergenceRow, FigureSpec, FitResultFile, SweepRow } from "./schema.js";

type EChartsOption = echarts.EChartsOption;

const PALETTE = ["#2f6db3", "#c23b22", "#3d8f5f", "#8a5ab8", "#b8860b", "#4a4a4a"];

function renderToSvg(option: EChartsOption, spec: FigureSpec): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width,
    height: spec.height,
  });
  chart.setOption({ animation: false, ...option });
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}

function errorBarSeries(
  points: Array<[number, number, number]>,
  color: string,
): echarts.CustomSeriesOption {
  return {
    type: "custom",
    silent: true,
    z: 5,
    itemStyle: { color },
    data: points,
    renderItem: (_params, api) => {
      const x = api.value(0) as number;
      const lo = api.value(1) as number;
      const hi = api.value(2) as number;
      const top = api.coord([x, hi]);
      const bot = api.coord([x, lo]);
      const w = 4;
      return {
        type: "group",
        children: [
          { type: "line", shape: { x1: top[0], y1: top[1], x2: bot[0], y2: bot[1] },
            style: { stroke: color, lineWidth: 1 } },
          { type: "line", shape: { x1: top[0] - w, y1: top[1], x2: top[0] + w, y2: top[1] },
            style: { stroke: color, lineWidth: 1 } },
          { type: "line", shape: { x1: bot[0] - w, y1: bot[1], x2: bot[0] + w, y2: bot[1] },
            style: { stroke: color, lineWidth: 1 } },
        ],
      };
    },
  };
}

export interface LogicalCurvesResult {
  svg: string;
  pseudothresholds: Map<number, number | null>;
  crossings: Array<{ m1: number; m2: number; p: number | null }>;
}

export function renderLogicalCurves(rows: SweepRow[], spec: FigureSpec): LogicalCurvesResult {
  const bySize = curveBySize(rows);
  const sizes = [...bySize.keys()].sort((a, b) => a - b);
  const series: echarts.SeriesOption[] = [];
  const pseudothresholds = new Map<number, number | null>();

  const allPs = rows.map((r) => r.p);
  const pMin = spec.xRange ? spec.xRange[0] : Math.min(...allPs);
  const pMax = spec.xRange ? spec.xRange[1] : Math.max(...allPs);

  sizes.forEach((m, i) => {
    const pts = bySize.get(m)!;
    const color = PALETTE[i % PALETTE.length];
    series.push({
      name: `n=${pts[0].n} (d=${pts[0].d})`,
      type: "line",
      data: pts.map((r) => [r.p, r.p_L_avg]),
      itemStyle: { color },
      lineStyle: { color },
      symbolSize: 6,
    });
    series.push(errorBarSeries(pts.map((r) => [r.p, r.ci_lo, r.ci_hi]), color));
    pseudothresholds.set(
      m,
      diagonalCrossing(pts.map((r) => r.p), pts.map((r) => r.p_L_avg)),
    );
  });

  // the p_L = p diagonal that defines the pseudothreshold
  series.push({
    name: "p_L = p",
    type: "line",
    data: [
      [pMin, pMin],
      [pMax, pMax],
    ],
    showSymbol: false,
    lineStyle: { color: "#777", type: "dashed" },
  });

  const crossings: LogicalCurvesResult["crossings"] = [];
  for (let i = 0; i + 1 < sizes.length; i++) {
    const a = bySize.get(sizes[i])!;
    const b = bySize.get(sizes[i + 1])!;
    const shared = a
      .map((r) => r.p)
      .filter((p) => b.some((rb) => Math.abs(rb.p - p) < 1e-12));
    const ya = shared.map((p) => a.find((r) => Math.abs(r.p - p) < 1e-12)!.p_L_avg);
    const yb = shared.map((p) => b.find((r) => Math.abs(r.p - p) < 1e-12)!.p_L_avg);
    crossings.push({ m1: sizes[i], m2: sizes[i + 1], p: curveCrossing(shared, ya, yb) });
  }

  const option: EChartsOption = {
    title: { text: "Logical error rate vs physical bit-flip rate" },
    legend: { top: 28 },
    xAxis: {
      type: "log", name: "physical error rate p",
      min: spec.xRange?.[0], max: spec.xRange?.[1],
    },
    yAxis: {
      type: "log", name: "average logical error rate",
      min: spec.yRange?.[0], max: spec.yRange?.[1],
    },
    series,
  };
  return { svg: renderToSvg(option, spec), pseudothresholds, crossings };
}

export function renderThresholdFit(fit: FitResultFile, spec: FigureSpec): string {
  const entries = Object.values(fit.pseudothresholds).sort((a, b) => a.d - b.d);
  if (entries.length === 0) {
    throw new Error("fit JSON carries no pseudothresholds");
  }
  const series: echarts.SeriesOption[] = [
    {
      name: "pseudothresholds",
      type: "scatter",
      data: entries.map((e) => [e.d, e.p_star]),
      symbolSize: 9,
      itemStyle: { color: PALETTE[0] },
    },
  ];
  const bars: Array<[number, number, number]> = entries
    .filter((e) => e.ci_lo != null && e.ci_hi != null && Number.isFinite(e.ci_lo!) && Number.isFinite(e.ci_hi!))
    .map((e) => [e.d, e.ci_lo!, e.ci_hi!]);
  if (bars.length > 0) {
    series.push(errorBarSeries(bars, PALETTE[0]));
  }
  if (fit.fit) {
    const ds = entries.map((e) => e.d);
    const curve = scalingCurve(fit.fit.a, fit.fit.nu, fit.fit.t_inf,
                               Math.min(...ds) * 0.8, Math.max(...ds) * 1.3);
    series.push({
      name: `fit t(L) = a L^(-1/nu) + t_inf (t_inf=${fit.fit.t_inf.toFixed(4)})`,
      type: "line",
      data: curve,
      showSymbol: false,
      lineStyle: { color: PALETTE[1] },
    });
    series.push({
      name: "t_inf",
      type: "line",
      data: curve.map(([d]) => [d, fit.fit!.t_inf]),
      showSymbol: false,
      lineStyle: { color: "#777", type: "dashed" },
    });
  }
  const option: EChartsOption = {
    title: { text: "Pseudothresholds and finite-size scaling fit" },
    legend: { top: 28 },
    xAxis: { type: "log", name: "code distance d" },
    yAxis: {
      type: "value", name: "pseudothreshold",
      min: spec.yRange?.[0], max: spec.yRange?.[1],
    },
    series,
  };
  return renderToSvg(option, spec);
}

export function renderConvergence(rows: ConvergenceRow[], spec: FigureSpec): string {
  const groups = new Map<string, ConvergenceRow[]>();
  for (const row of rows) {
    const key = `m=${row.m}, p=${row.p}`;
    const list = groups.get(key) ?? [];
    list.push(row);
    groups.set(key, list);
  }
  const mainSeries: echarts.SeriesOption[] = [];
  const insetSeries: echarts.SeriesOption[] = [];
  let i = 0;
  for (const [key, list] of groups) {
    list.sort((a, b) => a.round - b.round);
    const color = PALETTE[i++ % PALETTE.length];
    mainSeries.push({
      name: key,
      type: "line",
      xAxisIndex: 0,
      yAxisIndex: 0,
      data: list.filter((r) => r.change_fraction > 0)
        .map((r) => [r.round, r.change_fraction]),
      itemStyle: { color },
      lineStyle: { color },
    });
    insetSeries.push({
      name: key,
      type: "line",
      xAxisIndex: 1,
      yAxisIndex: 1,
      data: list.map((r) => [r.round, r.cdf]),
      itemStyle: { color },
      lineStyle: { color },
      showSymbol: false,
    });
  }
  const option: EChartsOption = {
    title: { text: "Splitting-update convergence" },
    legend: { top: 28 },
    grid: [
      { left: 70, right: 30, top: 80, bottom: 60 },
      { left: "58%", right: 40, top: "22%", height: "30%" },
    ],
    xAxis: [
      { type: "value", gridIndex: 0, name: "update round" },
      { type: "value", gridIndex: 1, name: "round", nameGap: 18 },
    ],
    yAxis: [
      { type: "log", gridIndex: 0, name: "mean change fraction per splitting" },
      { type: "value", gridIndex: 1, name: "converged CDF", min: 0, max: 1 },
    ],
    series: [...mainSeries, ...insetSeries],
  };
  return renderToSvg(option, spec);
}
