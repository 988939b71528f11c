#!/usr/bin/env python3
"""Time the layout validity check on synthetic layouts of growing size."""

import argparse
import statistics

from devmux.layoutlint import check_layout_source


def synthetic_layout(n_widgets, n_edges):
    parts = ["<Layout>"]
    edges = 0
    for i in range(n_widgets):
        attrs = [f'id="w{i}"']
        for attr, offset in (
            ("layout_below", 1),
            ("layout_toLeftOf", 2),
            ("layout_centeredBelow", 3),
            ("layout_toRightOf", 4),
        ):
            if i - offset >= 0 and edges < n_edges:
                attrs.append(f'{attr}="w{i - offset}"')
                edges += 1
        if edges < n_edges:
            attrs.append('layout_centerInParent="true"')
            edges += 1
        parts.append(f"<TextView {' '.join(attrs)}/>")
    parts.append("</Layout>")
    return "".join(parts)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=10)
    args = ap.parse_args()

    print("widgets  edges   median_ms  p_max_ms  statements  findings")
    for widgets, edges in ((50, 200), (200, 800), (500, 2000), (1000, 4000)):
        xml = synthetic_layout(widgets, edges)
        timings = []
        report = None
        for _ in range(args.runs):
            report = check_layout_source(xml)
            timings.append(report.elapsed_ms)
        print(
            f"{widgets:<8d} {edges:<7d} {statistics.median(timings):<10.2f} "
            f"{max(timings):<9.2f} {len(report.statements):<11d} {len(report.findings)}"
        )


if __name__ == "__main__":
    main()
