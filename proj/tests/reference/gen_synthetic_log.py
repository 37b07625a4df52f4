#!/usr/bin/env python3
"""Generate the seeded synthetic browsing log used by the replay golden test.

    gen_synthetic_log.py --data-dir data --out-dir tests/data

Writes synthetic_log.jsonl (ReplayRecord lines) and replay_policy.json.
"""

import argparse
import json
import os
import random

SEED = 20160111
RECORDS = 5000
USERS = ["u%d" % i for i in range(1, 9)]

FILLER = ("today story read page people great new first last year time day week "
          "life world best find help make know look show part place right thing "
          "good long little small large next early young important public "
          "share comment subscribe menu login search home contact").split()

TRACKER_HOSTS = [
    "www.google-analytics.com", "stats.g.doubleclick.net", "connect.facebook.net",
    "www.facebook.com", "pixel.quantserve.com", "b.scorecardresearch.com",
    "cdn.taboola.com", "widgets.outbrain.com", "static.criteo.net", "ib.adnxs.com",
    "s.amazon-adsystem.com", "platform.twitter.com", "www.googletagservices.com",
    "sb.scorecardresearch.com", "tags.bluekai.com", "dpm.demdex.net", "pixel.mathtag.com",
    "js-agent.newrelic.com", "cdn.mxpnl.com", "bat.bing.com", "ads.pubmatic.com",
    "fastlane.rubiconproject.com", "secure.adnxs.com", "www.googleadservices.com",
    "apis.google.com", "accounts.google.com", "ssl.gstatic.com", "fonts.googleapis.com",
    "ajax.googleapis.com", "d2x1.cloudfront.net", "i.ytimg.com", "static.xx.fbcdn.net",
    "cdnjs.cloudflare.com", "code.jquery.com", "s0.wp.com", "use.typekit.net",
]
TRACKER_WEIGHTS = [max(1, 40 - i) for i in range(len(TRACKER_HOSTS))]

AD_IFRAMES = [
    "https://tpc.googlesyndication.com/safeframe/1-0-2/html/container.html",
    "https://ad.doubleclick.net/ddm/adi/N1234.site/B5678;sz=300x250",
    "https://ads.pubmatic.com/AdServer/js/showad.js#iframe",
    "https://cdn.taboola.com/libtrc/widget.html",
    "https://s0.2mdn.net/ads/richmedia/studio/pv2/index.html",
    "https://secure.adnxs.com/tt?id=42",
    "https://static.criteo.net/design/dt/frame.html",
    "https://aax-eu.amazon-adsystem.com/x/getad",
    "https://bs.serving-sys.com/Serving/adServer.bs",
    "https://widgets.outbrain.com/external/publishers/frame.html",
]
OTHER_IFRAMES = [
    "https://www.youtube.com/embed/dQw4w9WgXcQ",
    "https://player.vimeo.com/video/12345",
    "https://www.facebook.com/plugins/like.php?href=x",
    "https://platform.twitter.com/widgets/tweet_button.html",
    "javascript:void(0)",
]

DOMAIN_SITES = ["www.cnn.com", "techcrunch.com", "www.webmd.com", "www.espn.com",
                "www.biblegateway.com", "www.politico.com", "www.nerdwallet.com",
                "www.imdb.com", "www.lemonde.fr", "news.bbc.co.uk", "www.zillow.com",
                "www.allrecipes.com", "stackoverflow.com", "www.reddit.com"]


def load_lexicon_by_category(data_dir):
    by_cat = {}
    with open(os.path.join(data_dir, "lexicon.tsv"), encoding="utf-8") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            term, _, weights = line.rstrip("\n").split("\t")
            best = max((p.rsplit(":", 1) for p in weights.split(",")), key=lambda cw: float(cw[1]))
            by_cat.setdefault(best[0], []).append(term)
    return by_cat


def slug(rng, words, n):
    return "-".join(rng.choice(words) for _ in range(n))


def make_site(rng, cat, idx):
    stem = cat.replace(" & ", "and").replace(" ", "")
    tld = rng.choice(["com", "net", "org", "co.uk", "fr", "io"])
    return "%s%s%d.%s" % (rng.choice(["the", "my", "daily", "all"]), stem, idx, tld)


def features(rng, terms, other_terms):
    def words(n, pool, ratio):
        out = []
        for _ in range(n):
            if pool and rng.random() < ratio:
                out.append(rng.choice(pool))
            else:
                out.append(rng.choice(FILLER))
        return " ".join(out)

    feats = {"title": words(rng.randint(3, 7), terms, 0.5),
             "keywords": [rng.choice(terms) for _ in range(rng.randint(0, 4))] if terms else [],
             "body": words(rng.randint(20, 60), terms + other_terms, 0.25)}
    if rng.random() < 0.5:
        feats["body"] += " " + words(10, other_terms or FILLER, 0.6)
    return feats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data-dir", required=True)
    ap.add_argument("--out-dir", required=True)
    args = ap.parse_args()

    rng = random.Random(SEED)
    by_cat = load_lexicon_by_category(args.data_dir)
    cats = sorted(by_cat)
    sites = {c: [make_site(rng, c, i) for i in range(3)] for c in cats}
    site_specific = {}

    history = []
    records = []
    for i in range(RECORDS):
        rec = {"ts": 1452470400 + 37 * i, "user": rng.choice(USERS)}
        if history and rng.random() < 0.3:
            prev = rng.choice(history)
            rec.update({k: prev[k] for k in ("page", "html", "features") if k in prev})
        else:
            roll = rng.random()
            if roll < 0.15:
                host = rng.choice(DOMAIN_SITES)
                rec["page"] = "https://%s/%s/%d" % (host, slug(rng, FILLER, 2), rng.randint(1, 9999))
                rec["html"] = None
            elif roll < 0.94:
                cat = rng.choice(cats)
                other = rng.choice(cats) if rng.random() < 0.3 else None
                host = "www." + rng.choice(sites[cat]) if rng.random() < 0.5 else rng.choice(sites[cat])
                path_terms = by_cat[cat] if rng.random() < 0.5 else FILLER
                rec["page"] = "http://%s/%s?id=%d" % (host, slug(rng, [t.replace(" ", "-") for t in path_terms], 2),
                                                      rng.randint(1, 99999))
                feats = features(rng, by_cat[cat], by_cat[other] if other else [])
                if rng.random() < 0.03:
                    feats["declaredCategory"] = rng.choice(cats)
                elif rng.random() < 0.01:
                    feats["declaredCategory"] = "not a category"
                rec["features"] = feats
            else:
                rec["page"] = "https://blank%d.example/%d#frag" % (rng.randint(1, 40), rng.randint(1, 500))
                rec["features"] = {"title": "", "keywords": [], "body": " ".join(rng.choice(FILLER) for _ in range(8))}
            history.append(rec)

        page_host = rec["page"].split("://", 1)[1].split("/", 1)[0].split("#", 1)[0]
        base = page_host[4:] if page_host.startswith("www.") else page_host
        subs = []
        for _ in range(rng.randint(0, 12)):
            r = rng.random()
            if r < 0.65:
                subs.append(rng.choices(TRACKER_HOSTS, TRACKER_WEIGHTS)[0])
            elif r < 0.8:
                subs.append(rng.choice(["img.", "static.", "cdn."]) + base)
            else:
                own = site_specific.setdefault(base, base.split(".")[0] + "-static.net")
                subs.append(rng.choice(["a.", "b.", ""]) + own)
        if rng.random() < 0.02:
            subs.append("")
        rec["subresources"] = subs
        iframes = []
        for _ in range(rng.choice([0, 0, 1, 1, 2, 3])):
            iframes.append(rng.choice(AD_IFRAMES) if rng.random() < 0.7 else rng.choice(OTHER_IFRAMES))
        rec["iframes"] = iframes
        records.append(rec)

    lines = [json.dumps(r, ensure_ascii=False, separators=(",", ":")) for r in records]
    lines.insert(1234, '{"page": "not a url", "subresources": []}')
    lines.insert(3210, '{this is not json')
    with open(os.path.join(args.out_dir, "synthetic_log.jsonl"), "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")

    # Per-URL policies and one recategorization over pages that occur in the log.
    pages = [r["page"] for r in history if "features" in r]
    policy = {
        "blockedCategories": ["adult", "religion", "health & fitness", "politics", "personal finance"],
        "urlPolicies": {pages[3]: "allow", pages[10]: "block", pages[25]: "allow", pages[40]: "block"},
        "categoryOverrides": {pages[7]: ["sports"], pages[18]: ["religion", "history"]},
    }
    with open(os.path.join(args.out_dir, "replay_policy.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(policy, f, indent=2, ensure_ascii=False)
        f.write("\n")
    print("records=%d" % len(lines))


if __name__ == "__main__":
    main()
