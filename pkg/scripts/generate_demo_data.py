"""Generate the synthetic demo dataset committed under data/.

Everything here is fictional: made-up countries, parties, language editions
and page titles. The numbers are drawn from a seeded generator so reruns
reproduce the committed files byte for byte.

Outputs:
    data/demo_parties.csv        59 party observations in 10 election groups
    data/demo_pageviews.csv      daily views for every party page
    data/demo_general_pages.csv  daily views for 14 election overview pages
    data/demo_turnout.csv        aggregate view/turnout changes, 2 outliers

Usage: python scripts/generate_demo_data.py [--out-dir data]
"""

from __future__ import annotations

import argparse
import csv
import math
from datetime import date, timedelta
from pathlib import Path

import numpy as np

SEED = 20140525
ELECTION_2009 = date(2009, 6, 7)
ELECTION_2014 = date(2014, 5, 25)

COUNTRIES = ["Arcadia", "Borduria", "Cassovia", "Delphinia", "Erland"]
PROJECTS = {c: f"{c[:2].lower()}.wikipedia" for c in COUNTRIES}

PARTY_WORDS = [
    ("Unity", "Unita"), ("Progress", "Progreso"), ("Heritage", "Heredo"),
    ("Green Path", "Verda Vojo"), ("Labour Front", "Laborfronto"),
    ("Liberty", "Libereco"), ("New Horizon", "Nova Horizonto"),
    ("Digital Voice", "Cifereca Vocho"),
]

# per-country group design: (n big 2009, n big 2014); sizes fixed at 6
# except Erland 2009 which fields 5 parties. Big means vote share >= 15.
BIG_COUNTS = {
    "Arcadia": (3, 2),
    "Borduria": (2, 3),
    "Cassovia": (3, 2),
    "Delphinia": (2, 2),
    "Erland": (3, 2),
}


def is_incumbent(country: str, idx: int) -> int:
    """The winner governs everywhere; most countries add a junior partner.

    Party 3 is small by construction, so the small-party subset keeps
    incumbency variation (needed for the subset model fits).
    """
    if idx == 0:
        return 1
    if idx == 3 and country != "Delphinia":
        return 1
    return 0

PARTY_COLUMNS = [
    "country", "election_date", "party_id", "name_english", "name_local",
    "abbreviation", "is_new", "is_incumbent", "vote_share", "prev_vote_share",
    "news_mentions", "wiki_project", "wiki_page_title",
]
PAGEVIEWS_COLUMNS = ["wiki_project", "page_title", "date", "views"]
TURNOUT_COLUMNS = [
    "language_edition", "views_prev", "views_curr",
    "turnout_prev", "turnout_curr", "outlier",
]


def draw_shares(rng: np.random.Generator, n_big: int, n_small: int) -> list[float]:
    """Vote shares for one group: n_big values >= 15.5, n_small in [5.2, 13.5]."""
    while True:
        big = sorted(rng.uniform(15.5, 34.0, size=n_big), reverse=True)
        small = sorted(rng.uniform(5.2, 13.5, size=n_small), reverse=True)
        shares = [round(v, 1) for v in list(big) + list(small)]
        if sum(shares) <= 98.0 and all(s >= 15.5 for s in shares[:n_big]) \
                and all(s < 14.0 for s in shares[n_big:]):
            return shares


def build_parties(rng: np.random.Generator) -> list[dict]:
    rows: list[dict] = []
    for country in COUNTRIES:
        project = PROJECTS[country]
        code = country[:3].lower()
        n_2009 = 5 if country == "Erland" else 6
        big09, big14 = BIG_COUNTS[country]

        # established parties p0..p5 contest 2009; p0..p3 return in 2014
        # alongside two parties founded in between.
        shares09 = draw_shares(rng, big09, n_2009 - big09)
        established = list(range(n_2009))
        for rank, idx in enumerate(established):
            english, local = PARTY_WORDS[idx]
            prev = round(min(96.0, max(0.4, shares09[rank] + rng.normal(0.0, 3.0))), 1)
            rows.append({
                "country": country,
                "election_date": ELECTION_2009,
                "party_id": f"{code}_p{idx}",
                "name_english": f"{english} Party",
                "name_local": f"Partio {local}",
                "abbreviation": f"{code.upper()}{idx}",
                "is_new": 0,
                "is_incumbent": is_incumbent(country, idx),
                "vote_share": shares09[rank],
                "prev_vote_share": prev,
                "wiki_project": project,
                "wiki_page_title": f"{english} Party ({country})",
            })

        share09_by_idx = {idx: shares09[rank] for rank, idx in enumerate(established)}
        returning = [0, 1, 2, 3]
        newcomers = [6, 7]
        shares14 = draw_shares(rng, big14, 6 - big14)
        # returning parties take the first four slots, newcomers the last two;
        # newcomers are always small, so give them the two smallest shares.
        order = returning + newcomers
        shares14 = sorted(shares14, reverse=True)
        for rank, idx in enumerate(order):
            english, local = PARTY_WORDS[idx]
            is_new = idx in newcomers
            rows.append({
                "country": country,
                "election_date": ELECTION_2014,
                "party_id": f"{code}_p{idx}",
                "name_english": f"{english} Party" if not is_new else f"{english} Movement",
                "name_local": f"Partio {local}" if not is_new else f"Movado {local}",
                "abbreviation": f"{code.upper()}{idx}",
                "is_new": 1 if is_new else 0,
                "is_incumbent": is_incumbent(country, idx),
                "vote_share": shares14[rank],
                "prev_vote_share": None if is_new else share09_by_idx[idx],
                "wiki_project": project,
                "wiki_page_title": (
                    f"{english} Party ({country})" if not is_new
                    else f"{english} Movement ({country})"
                ),
            })
    return rows


def assign_news_mentions(rng: np.random.Generator, rows: list[dict]) -> None:
    """News coverage roughly tracks vote share, with noise and a floor."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["country"], row["election_date"]), []).append(row)
    for members in groups.values():
        total = int(rng.integers(900, 2600))
        weights = np.array([
            max(0.5, row["vote_share"] ** 1.1 + rng.normal(0.0, 6.0)) for row in members
        ])
        weights /= weights.sum()
        for row, w in zip(members, weights):
            row["news_mentions"] = max(1, int(round(total * float(w))))


def attention_block(
    rng: np.random.Generator,
    baseline: float,
    peak_height: float,
    peak_day: date,
    start: date,
    end: date,
    lam_up: float,
    lam_down: float,
) -> list[tuple[date, int]]:
    """Baseline plus an asymmetric exponential hump, small noise, >= 0."""
    out = []
    day = start
    while day <= end:
        offset = (day - peak_day).days
        lam = lam_up if offset <= 0 else lam_down
        hump = peak_height * math.exp(-lam * abs(offset))
        noise = rng.normal(0.0, 0.03 * (baseline + hump))
        out.append((day, max(0, int(round(baseline + hump + noise)))))
        day += timedelta(days=1)
    return out


def build_party_pageviews(rng: np.random.Generator, rows: list[dict]) -> list[tuple]:
    """One series per page; pages contested twice get two date blocks."""
    pages: dict[tuple[str, str], list[dict]] = {}
    for row in rows:
        pages.setdefault((row["wiki_project"], row["wiki_page_title"]), []).append(row)

    records = []
    for (project, title), appearances in sorted(pages.items()):
        for row in sorted(appearances, key=lambda r: r["election_date"]):
            election = row["election_date"]
            baseline = max(20.0, 35.0 * row["vote_share"])
            boost = 3.0 if row["is_new"] else 1.0
            peak_height = baseline * rng.uniform(5.0, 11.0) * boost
            block = attention_block(
                rng,
                baseline=baseline,
                peak_height=peak_height,
                peak_day=election - timedelta(days=1),
                start=election - timedelta(days=35),
                end=election + timedelta(days=15),
                lam_up=rng.uniform(0.08, 0.14),
                lam_down=rng.uniform(0.2, 0.35),
            )
            for day, views in block:
                records.append((project, title, day.isoformat(), views))
    return records


def build_general_pageviews(rng: np.random.Generator) -> list[tuple]:
    """14 election overview pages with decay planted faster than build-up."""
    records = []
    peak_day = ELECTION_2014 - timedelta(days=1)
    for i in range(1, 15):
        project = f"lang{i:02d}.wikipedia"
        lam_up = rng.uniform(0.09, 0.15)
        lam_down = lam_up + rng.uniform(0.1, 0.25)
        peak = rng.uniform(18_000, 60_000)
        day = ELECTION_2014 - timedelta(days=35)
        while day <= ELECTION_2014 + timedelta(days=35):
            offset = (day - peak_day).days
            lam = lam_up if offset <= 0 else lam_down
            views = int(round(peak * math.exp(-lam * abs(offset))))
            records.append((project, "Parliament election", day.isoformat(), views))
            day += timedelta(days=1)
    return records


def build_turnout(rng: np.random.Generator) -> list[tuple]:
    """12 clean records with correlation exactly 0.72 plus two flagged outliers.

    The turnout changes are assembled from the view changes by projecting a
    noise vector orthogonal to them, so the sample correlation is planted
    rather than left to chance; rounding to CSV precision moves it by far
    less than reporting tolerance.
    """
    target_r = 0.72
    n = 12
    x = rng.uniform(0.10, 0.95, size=n)
    z = rng.normal(size=n)
    xc = x - x.mean()
    zc = z - z.mean()
    z_orth = zc - (zc @ xc) / (xc @ xc) * xc
    y_unit = target_r * xc / math.sqrt(float(xc @ xc)) \
        + math.sqrt(1.0 - target_r ** 2) * z_orth / math.sqrt(float(z_orth @ z_orth))
    y = 0.05 + 0.04 * y_unit / y_unit.std()

    check = np.corrcoef(x, y)[0, 1]
    assert abs(check - target_r) < 1e-12, check

    records = []
    for i in range(n):
        views_prev = int(rng.integers(800_000, 4_000_000))
        views_curr = int(round(views_prev * (1.0 + x[i])))
        turnout_prev = round(float(rng.uniform(32.0, 68.0)), 2)
        turnout_curr = round(turnout_prev * (1.0 + y[i]), 4)
        records.append((f"lang{i + 1:02d}", views_prev, views_curr,
                        f"{turnout_prev:.2f}", f"{turnout_curr:.4f}", 0))

    # verify the correlation survives the round trip through CSV precision
    xr = [r[2] / r[1] - 1.0 for r in records]
    yr = [float(r[4]) / float(r[3]) - 1.0 for r in records]
    r_rounded = float(np.corrcoef(xr, yr)[0, 1])
    assert abs(r_rounded - target_r) < 2e-3, r_rounded

    # two well-known distortions: a bot-inflated edition and a tiny one with
    # a turnout rule change between the elections
    records.append(("lang13", 5_200_000, 14_560_000, "61.40", "48.9000", 1))
    records.append(("lang14", 90_000, 83_000, "35.20", "62.1000", 1))
    return records


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="data")
    args = parser.parse_args()
    out = Path(args.out_dir)

    rng = np.random.default_rng(SEED)
    party_rows = build_parties(rng)
    assign_news_mentions(rng, party_rows)

    assert len(party_rows) == 59, len(party_rows)
    small = [r for r in party_rows if r["vote_share"] < 15.0]
    assert len(small) == 35, len(small)
    new = [r for r in party_rows if r["is_new"]]
    assert len(new) == 10 and all(r["prev_vote_share"] is None for r in new)

    csv_rows = []
    for row in party_rows:
        prev = row["prev_vote_share"]
        csv_rows.append([
            row["country"], row["election_date"].isoformat(), row["party_id"],
            row["name_english"], row["name_local"], row["abbreviation"],
            row["is_new"], row["is_incumbent"], f"{row['vote_share']:.1f}",
            "" if prev is None else f"{prev:.1f}", row["news_mentions"],
            row["wiki_project"], row["wiki_page_title"],
        ])
    write_csv(out / "demo_parties.csv", PARTY_COLUMNS, csv_rows)
    write_csv(out / "demo_pageviews.csv", PAGEVIEWS_COLUMNS,
              build_party_pageviews(rng, party_rows))
    write_csv(out / "demo_general_pages.csv", PAGEVIEWS_COLUMNS,
              build_general_pageviews(rng))
    write_csv(out / "demo_turnout.csv", TURNOUT_COLUMNS, build_turnout(rng))

    print(f"wrote 4 files to {out}/ (59 parties, {len(small)} below 15%)")


if __name__ == "__main__":
    main()
