"""Regenerates the bundled fixture corpus and its word vectors.

Run from the repository root: python3 data/fixtures/generate.py
Output is deterministic (fixed seed).
"""

import csv
import json
import re
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent
DIM = 32
SEED = 20221016

SOURCES = [
    {"id": "src-healthnews", "name": "Health News Daily", "base_url": "https://healthnews.example",
     "reliability": "reliable", "kind": "news_or_blog"},
    {"id": "src-citypaper", "name": "City Paper", "base_url": "https://citypaper.example",
     "reliability": "reliable", "kind": "news_or_blog"},
    {"id": "src-wellnessblog", "name": "Natural Wellness Blog", "base_url": "https://wellness.example",
     "reliability": "unreliable", "kind": "news_or_blog"},
    {"id": "src-dailybuzz", "name": "Daily Buzz", "base_url": "https://dailybuzz.example",
     "reliability": "unreliable", "kind": "news_or_blog"},
    {"id": "fc-healthcheck", "name": "HealthCheck", "base_url": "https://healthcheck.example",
     "reliability": "reliable", "kind": "fact_checker"},
    {"id": "fc-metafacts", "name": "MetaFacts", "base_url": "https://metafacts.example",
     "reliability": "reliable", "kind": "fact_checker"},
]

CLAIMS = [
    ("c01", "Garlic cures cancer.", "false", "fc-healthcheck"),
    ("c02", "Vaccines cause autism.", "false", "fc-healthcheck"),
    ("c03", "Vitamin C prevents the common cold.", "mostly false", "fc-metafacts"),
    ("c04", "5G networks spread the coronavirus.", "false", "fc-healthcheck"),
    ("c05", "Fluoride in drinking water lowers IQ.", "mixture", "fc-metafacts"),
    ("c06", "Coffee protects the liver.", "true", "fc-metafacts"),
    ("c07", "Sugar makes children hyperactive.", "false", "fc-healthcheck"),
    ("c08", "Microwaving food destroys nutrients.", "mostly false", "fc-metafacts"),
    ("c09", "Face masks reduce oxygen levels.", "false", "fc-healthcheck"),
    ("c10", "Cracking knuckles causes arthritis.", "unknown", "fc-metafacts"),
]

# id, source, split, published, title, body
ARTICLES = [
    ("a01", "src-healthnews", "sample1", "2021-03-02T09:00:00Z",
     "Can garlic cure cancer? Experts weigh in",
     "Posts shared online claim that garlic cures cancer. Oncologists say there is no evidence for it. "
     "Allicin, a compound found in garlic cloves, has been studied in tumor cells. "
     "No clinical trial has shown that eating cloves can replace chemotherapy. "
     "Patients should keep following the advice of their doctors."),
    ("a02", "src-wellnessblog", "sample1", "2021-03-05T12:30:00Z",
     "Ancient remedy: garlic against cancer",
     "Garlic cures cancer, and the drug industry does not want you to know it. "
     "Eat three raw cloves of garlic every morning. Allicin attacks malignant tumors naturally. "
     "Many readers told us a tumor shrank after a month of this garlic remedy."),
    ("a03", "src-healthnews", "sample1", "2021-04-11T08:15:00Z",
     "Onion extract slows tumor growth in the lab",
     "Researchers tested onion and clove extracts on malignant tumor cells in the laboratory. "
     "The extracts slowed tumor growth in culture dishes. "
     "Oncology experts warned that laboratory results rarely translate to patients. "
     "Chemotherapy remains the standard treatment for most tumors."),
    ("a04", "src-citypaper", "sample1", "2021-05-20T18:00:00Z",
     "Local chef wins regional cooking contest",
     "The chef won the regional contest with a slow roast lamb served with a rich sauce. "
     "He joked that his roasted garlic butter on crisp potatoes cures any hunger after the lamb dinner with gravy at the cancer charity gala. "
     "Judges praised the crisp potatoes and the flavor of the gravy. "
     "The kitchen team plans to add the recipe to the restaurant menu next season. "
     "Tickets for the next dinner sold out within an hour."),
    ("a05", "src-dailybuzz", "sample1", "2021-06-01T07:45:00Z",
     "The vaccine truth they are hiding",
     "Vaccines cause autism, and thousands of parents have seen it happen. "
     "The MMR shot overwhelms young immune systems and triggers developmental disorders. "
     "Ask questions before your child gets another jab."),
    ("a06", "src-healthnews", "sample2", "2022-01-14T10:00:00Z",
     "Large study finds no link between vaccines and autism",
     "A study of 650,000 children found that the MMR vaccine does not cause autism. "
     "Vaccinated and unvaccinated children were diagnosed with autism at the same rate. "
     "Researchers hope the findings will reassure parents who hesitate over immunization."),
    ("a07", "src-citypaper", "sample2", "2022-02-03T16:20:00Z",
     "Council approves school budget after long debate",
     "The council approved the school budget after a debate that lasted until midnight. "
     "One member argued that election promises on vaccines would cause budget delays, while another raised "
     "the cost of autism staff in the parliament motion on school policy, and the vote passed narrowly. "
     "The mayor will sign the budget next week. "
     "Opposition members said they would campaign against the tax increase."),
    ("a08", "src-wellnessblog", "sample1", "2021-11-02T06:00:00Z",
     "Vitamin C: your best defence this winter",
     "Vitamin C prevents a common cold, so stock up on oranges. "
     "Citrus fruit and supplements keep your immune system strong. "
     "Our readers swear by a daily dose of ascorbic acid."),
    ("a09", "src-healthnews", "sample2", "2022-04-24T19:10:00Z",
     "City marathon draws a record crowd",
     "More than twenty thousand runners crossed the finish line of the city marathon on Sunday. "
     "The winner set a course record despite strong wind in the final kilometres. "
     "Volunteers handed out water at every station along the route. "
     "One volunteer handed out oranges and insisted that vitamin C prevents the cold. "
     "The race director thanked the police for closing the roads. "
     "Next year the organisers hope to add a half marathon for younger athletes."),
    ("a10", "src-citypaper", "sample1", "2021-04-30T11:00:00Z",
     "No, 5G masts do not spread the coronavirus",
     "Engineers explain that radio waves from 5G networks cannot spread coronavirus. "
     "A virus travels in respiratory droplets and not through wireless signals. "
     "Several masts were vandalised after the rumour spread online."),
    ("a11", "src-dailybuzz", "sample2", "2022-03-09T22:00:00Z",
     "What they will not tell you about 5G",
     "The coronavirus outbreak began right where 5G networks were switched on. "
     "We believe 5G radiation weakens the body and helps spread the virus. "
     "Share this before it is deleted."),
    ("a12", "src-healthnews", "sample1", "2021-09-15T13:00:00Z",
     "Fluoride debate returns to the city council",
     "Some parents argue that fluoride added to drinking water lowers the IQ of children. "
     "Dentists reply that fluoridation prevents tooth decay. "
     "The council will review the evidence next month."),
    ("a13", "src-citypaper", "sample2", "2022-05-18T09:30:00Z",
     "Dentists back municipal fluoridation",
     "Dentists say municipal water fluoridation protects the teeth of children. "
     "Toothpaste with fluoride also remains important for dental health. "
     "A review of dental programmes found no effect on cognitive development."),
    ("a14", "src-wellnessblog", "sample2", "2022-06-07T07:00:00Z",
     "Your morning espresso is good for you",
     "Good news for espresso lovers: coffee protects the liver. "
     "Studies link caffeine to lower rates of cirrhosis. "
     "Two cups a day may keep liver enzymes healthy."),
    ("a15", "src-healthnews", "sample2", "2022-07-21T15:45:00Z",
     "Sugar and hyperactivity: a persistent myth",
     "Many parents believe that sugar makes children hyperactive. "
     "Controlled trials found no difference in behavior after sweets or candy. "
     "Parents who expected hyperactivity rated their kids as more active."),
    ("a16", "src-citypaper", "sample1", "2021-08-12T10:30:00Z",
     "New bakery opens in the old market hall",
     "The new bakery in the market hall makes bread with brown sugar, and the owner says children at the "
     "stock market stall were hyperactive at the opening sale while investors bought shares. "
     "Prices start at two dollars. "
     "The owner plans a second shop near the bank next year."),
    ("a17", "src-wellnessblog", "sample1", "2021-10-03T17:00:00Z",
     "Stop microwaving your dinner",
     "Microwaving food destroys nutrients, warns our nutrition coach. "
     "Heating vegetables in the microwave ruins their vitamins. "
     "Steam them instead."),
    ("a18", "src-healthnews", "sample2", "2022-02-25T08:40:00Z",
     "Do face masks lower oxygen? Doctors test it",
     "Doctors measured oxygen saturation in volunteers who wore face masks for hours. "
     "The masks did not reduce oxygen levels in healthy adults. "
     "Carbon dioxide stayed within safe limits."),
    ("a19", "src-dailybuzz", "sample2", "2022-09-01T20:00:00Z",
     "The goalkeeper and his strange routine",
     "The goalkeeper kept another clean sheet as his team won the league match on Saturday. "
     "The coach praised the defence and the crowd sang for ninety minutes. "
     "Before every game he stretches his fingers in the tunnel. "
     "He admits that cracking knuckles causes arthritis but says the habit calms his nerves. "
     "The club hopes to extend his contract for another season. "
     "Fans voted him player of the month."),
    ("a20", "src-citypaper", "sample1", "2021-12-10T06:30:00Z",
     "Storm warning for the weekend",
     "Forecasters expect heavy rain and strong wind from Friday night. "
     "River levels could rise quickly and residents should face the storm with care. "
     "Temperatures will drop sharply on Sunday."),
    ("a21", "src-dailybuzz", "sample1", "2021-07-19T21:00:00Z",
     "Masks are making us sick",
     "Tight masks reduce oxygen levels in your blood, a nurse told our reporter. "
     "Breathing the same air for hours leaves people dizzy. "
     "Take your mask off whenever you can."),
    ("a22", "src-wellnessblog", "sample2", "2022-08-02T08:00:00Z",
     "Why we filter our tap water",
     "Fluoride in tap water lowers IQ, according to a study our readers shared. "
     "Filters remove fluoride and chlorine from every glass. "
     "Dentists disagree, but we prefer to be careful."),
    ("a23", "src-dailybuzz", "sample1", "2021-05-02T23:10:00Z",
     "Towers went up and people got sick",
     "The new 5G towers spread the coronavirus faster than anyone admits. "
     "Our readers noticed symptoms the week the masts were switched on. "
     "Officials refuse to answer our questions."),
    ("a24", "src-citypaper", "sample2", "2022-01-28T12:00:00Z",
     "Pharmacies report a run on supplements",
     "Shoppers told pharmacists that vitamin C wards off the common cold. "
     "Several stores ran out of orange tablets by Tuesday. "
     "Pharmacists recommend rest and fluids for anyone who feels ill."),
]

# article, claim, presence, stance
LABELS = [
    ("a01", "c01", "present", "contradicting"),
    ("a02", "c01", "present", "supporting"),
    ("a03", "c01", "not_present", None),
    ("a04", "c01", "not_present", None),
    ("a05", "c01", "not_present", None),
    ("a05", "c02", "present", "supporting"),
    ("a06", "c02", "present", "contradicting"),
    ("a07", "c02", "not_present", None),
    ("a15", "c02", "not_present", None),
    ("a01", "c02", "not_present", None),
    ("a08", "c03", "present", "supporting"),
    ("a09", "c03", "present", "neutral"),
    ("a14", "c03", "not_present", None),
    ("a10", "c04", "present", "contradicting"),
    ("a11", "c04", "suggestive", "supporting"),
    ("a18", "c04", "not_present", None),
    ("a20", "c04", "not_present", None),
    ("a12", "c05", "present", "neutral"),
    ("a13", "c05", "not_present", None),
    ("a17", "c05", "not_present", None),
    ("a14", "c06", "present", "supporting"),
    ("a08", "c06", "not_present", None),
    ("a15", "c07", "present", "contradicting"),
    ("a16", "c07", "not_present", None),
    ("a06", "c07", "not_present", None),
    ("a17", "c08", "present", "supporting"),
    ("a12", "c08", "not_present", None),
    ("a18", "c09", "present", "contradicting"),
    ("a20", "c09", "not_present", None),
    ("a10", "c09", "not_present", None),
    ("a19", "c10", "present", "supporting"),
    ("a04", "c10", "not_present", None),
    ("a21", "c09", "present", "supporting"),
    ("a21", "c04", "not_present", None),
    ("a22", "c05", "present", "supporting"),
    ("a22", "c06", "not_present", None),
    ("a23", "c04", "present", "supporting"),
    ("a23", "c09", "not_present", None),
    ("a24", "c03", "present", "neutral"),
    ("a24", "c08", "not_present", None),
]

# Topic clusters; words of one topic share most of their direction.
TOPICS = {
    "garlic": "garlic cancer tumor tumors malignant allicin onion clove cloves chemotherapy oncology "
              "oncologists remedy extract extracts",
    "vaccine": "vaccines vaccine vaccinated unvaccinated autism mmr immunization jab shot developmental "
               "disorders diagnosed",
    "vitamin": "vitamin c cold colds common citrus oranges supplements ascorbic acid immune dose pharmacies pharmacists tablets orange fluids",
    "fiveg": "5g coronavirus virus networks masts radio waves wireless signals radiation outbreak "
             "respiratory droplets towers symptoms",
    "fluoride": "fluoride fluoridation water drinking iq dentists tooth teeth toothpaste dental cognitive "
                "decay filter filters tap chlorine glass",
    "coffee": "coffee espresso liver caffeine cirrhosis cups enzymes",
    "sugar": "sugar children hyperactive hyperactivity sweets candy behavior kids parents active",
    "microwave": "microwaving microwave food nutrients heating vegetables vitamins nutrition steam",
    "mask": "face masks mask oxygen levels saturation carbon dioxide breathing blood dizzy air",
    "knuckles": "cracking knuckles arthritis fingers joints habit",
    "cooking": "chef roast roasted lamb sauce butter dinner gravy potatoes recipe kitchen restaurant "
               "menu flavor crisp bakery bread brown hunger",
    "sports": "marathon runners race finish winner course record athletes goalkeeper team league match "
              "coach defence crowd game tunnel club contract season fans player sheet",
    "politics": "council budget debate election member vote passed mayor opposition campaign tax "
                "parliament motion policy",
    "weather": "storm rain wind forecasters river temperatures weekend",
    "finance": "market stock investors shares prices dollars bank sale stall",
    "general": "cures cure cause causes prevents lowers protects makes destroys reduce spread study "
               "studies researchers experts evidence health doctors patients trial clinical",
}

# Groups that are near-synonyms in the vector space.
SYNONYMS = [
    ["cancer", "tumor", "tumors"],
    ["vaccines", "vaccine", "immunization"],
    ["coronavirus", "virus"],
    ["cold", "colds"],
    ["cure", "cures"],
    ["cause", "causes"],
]

MEDICAL_TERMS = ["cancer", "tumor", "autism", "vaccines", "cold", "coronavirus", "fluoride", "iq", "liver",
                 "arthritis", "oxygen", "nutrients", "hyperactive", "cirrhosis", "chemotherapy"]

STOPWORDS = set("a an and are as at be been but by can could did do does for from had has have he her his how "
                "i if in into is it its may more most no not of on or our she so some such than that the "
                "their them then there these they this those to too very was we were what when where which "
                "while who why will with would you your".split())

RATING_MAP = {
    "fc-healthcheck": {"Pants on Fire": "false", "False": "false", "Mostly False": "mostly false",
                       "Half True": "mixture", "Mostly True": "mostly true", "True": "true",
                       "Unproven": "unknown"},
    "fc-metafacts": {"Fake": "false", "Misleading": "mostly false", "Mixed": "mixture",
                     "Largely accurate": "mostly true", "Correct": "true", "Unverified": "unknown"},
}

RSS = """<?xml version="1.0" encoding="UTF-8"?>
<rss version="2.0" xmlns:content="http://purl.org/rss/1.0/modules/content/"
     xmlns:dc="http://purl.org/dc/elements/1.1/">
<channel>
  <title>Health News Daily</title>
  <link>https://healthnews.example/</link>
  <item>
    <title>Turmeric &amp; joint pain: what trials show</title>
    <link>https://healthnews.example/2022/10/turmeric-joints?utm_source=rss</link>
    <pubDate>Mon, 03 Oct 2022 09:00:00 GMT</pubDate>
    <dc:creator>Dana Reyes</dc:creator>
    <description>Short teaser only.</description>
  </item>
  <item>
    <title>Cold showers and immunity</title>
    <link>https://healthnews.example/2022/10/cold-showers</link>
    <pubDate>Tue, 04 Oct 2022 14:30:00 +0200</pubDate>
    <content:encoded><![CDATA[<p>A small study asked volunteers to end each shower with
      thirty seconds of cold water.</p><p>Sick days fell, but the number of colds did not.</p>
      <script>track()</script>]]></content:encoded>
  </item>
  <item>
    <title>Reader question: do eggs raise cholesterol?</title>
    <link>https://healthnews.example/2022/10/eggs</link>
    <pubDate>sometime last week</pubDate>
    <description>&lt;b&gt;Eggs&lt;/b&gt; raise blood cholesterol less than once believed.</description>
  </item>
</channel>
</rss>
"""

CLAIM_FEED = [
    {"statement": "Turmeric cures arthritis.", "rating": "Mostly False",
     "url": "https://healthcheck.example/claims/turmeric"},
    {"statement": "Cold showers prevent colds.", "rating": "Unproven",
     "url": "https://healthcheck.example/claims/cold-showers"},
    {"statement": "Eggs are as bad for you as smoking.", "rating": "Fake", "checker": "fc-metafacts",
     "url": "https://metafacts.example/claims/eggs"},
]

TURMERIC_PAGE = """<!DOCTYPE html>
<html><head><title>Turmeric &amp; joint pain</title><style>p { color: red; }</style></head>
<body><nav>Home | Health</nav>
<article><h1>Turmeric &amp; joint pain: what trials show</h1>
<p>Curcumin, the active compound in turmeric, has been tested in several small trials.</p>
<p>Some patients with arthritis reported less pain, but the effect was modest.&nbsp;No trial showed a cure.</p>
</article>
<footer>Copyright Health News Daily</footer></body></html>
"""

MONITORS = {
    "monitors": [
        {"id": "healthnews-rss", "provider": "rss", "interval_seconds": 3600,
         "params": {"feeds": ["feeds/healthnews.rss"], "source_id": "src-healthnews",
                    "url_map": "pages/url_map.json"},
         "chain": ["full_text"]},
        {"id": "healthcheck-claims", "provider": "claim_feed", "interval_seconds": 86400,
         "params": {"feeds": ["feeds/claims.jsonl"], "checker": "fc-healthcheck"}},
    ]
}

# FNC-style sample: headline/body pairs with agree, disagree, discuss and unrelated stances.
FNC_BODIES = [
    (101, "A new trial found that daily vitamin D did not reduce fractures in older adults. "
          "Researchers said the supplement, sold as \"bone insurance\", showed no benefit."),
    (102, "Officials confirmed that the city will add fluoride to its water supply next year.\n"
          "Dentists welcomed the decision, citing fewer cavities."),
    (103, "Experts debated whether coffee raises blood pressure. Some studies, they said, found a small "
          "short-term rise, while others found none."),
    (104, "The football club announced a new stadium, funded by private investors, with 40,000 seats."),
]
FNC_STANCES = [
    ("Vitamin D prevents fractures in older adults", 101, "disagree"),
    ("Vitamin D supplements do not prevent fractures", 101, "agree"),
    ("Vitamin D and bone health: the debate continues", 101, "discuss"),
    ("City to add fluoride to tap water", 102, "agree"),
    ("City rejects water fluoridation", 102, "disagree"),
    ("Is fluoride in water safe?", 102, "discuss"),
    ("Coffee raises blood pressure, study says", 103, "discuss"),
    ("Coffee has no effect on blood pressure", 103, "discuss"),
    ("Coffee definitely raises blood pressure", 103, "disagree"),
    ("Club unveils plans for 40,000-seat stadium", 104, "agree"),
    ("Vaccines cause autism", 104, "unrelated"),
    ("Garlic cures cancer", 103, "unrelated"),
]


def write_ingest():
    base = OUT / "ingest"
    (base / "feeds").mkdir(parents=True, exist_ok=True)
    (base / "pages").mkdir(parents=True, exist_ok=True)
    (base / "feeds" / "healthnews.rss").write_text(RSS, encoding="utf-8")
    with open(base / "feeds" / "claims.jsonl", "w", encoding="utf-8") as f:
        for r in CLAIM_FEED:
            f.write(json.dumps(r) + "\n")
    (base / "pages" / "turmeric.html").write_text(TURMERIC_PAGE, encoding="utf-8")
    url_map = {"https://healthnews.example/2022/10/turmeric-joints?utm_source=rss": "pages/turmeric.html"}
    (base / "pages" / "url_map.json").write_text(json.dumps(url_map, indent=2) + "\n", encoding="utf-8")
    (base / "monitors.json").write_text(json.dumps(MONITORS, indent=2) + "\n", encoding="utf-8")
    for target in (base / "rating_map.json", OUT.parent / "config" / "rating_map.json"):
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(RATING_MAP, indent=2) + "\n", encoding="utf-8")


def write_fnc():
    base = OUT / "fnc"
    base.mkdir(exist_ok=True)
    with open(base / "bodies.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Body ID", "articleBody"])
        w.writerows(FNC_BODIES)
    with open(base / "stances.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Headline", "Body ID", "Stance"])
        w.writerows(FNC_STANCES)


def tokens(text):
    out = []
    for word in text.split():
        t = "".join(ch for ch in word.lower() if ch.isalnum() or ord(ch) > 127)
        if t:
            out.append(t)
    return out


def build_vectors(vocabulary):
    rng = np.random.default_rng(SEED)
    centers, _ = np.linalg.qr(rng.standard_normal((DIM, len(TOPICS))))
    centers = centers.T
    topic_of = {}
    for i, (name, words) in enumerate(TOPICS.items()):
        for w in words.split():
            topic_of.setdefault(w, i)
    shared = {}
    for group in SYNONYMS:
        u = rng.standard_normal(DIM)
        for w in group:
            shared[w] = u / np.linalg.norm(u)

    vectors = {}
    for w in sorted(vocabulary):
        if w in STOPWORDS:
            continue
        if w in shared:
            u = shared[w] + 0.05 * rng.standard_normal(DIM)
        else:
            u = rng.standard_normal(DIM)
        u /= np.linalg.norm(u)
        if w in topic_of:
            v = 0.8 * centers[topic_of[w]] + 0.6 * u
        else:
            v = u
        vectors[w] = v / np.linalg.norm(v)
    return vectors


def main():
    vocab = set()
    for _, statement, _, _ in CLAIMS:
        vocab.update(tokens(statement))
    for _, _, _, _, title, body in ARTICLES:
        vocab.update(tokens(title))
        vocab.update(tokens(body))
    for words in TOPICS.values():
        vocab.update(words.split())

    def write_jsonl(name, rows):
        with open(OUT / name, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, ensure_ascii=False) + "\n")

    write_jsonl("sources.jsonl", SOURCES)
    write_jsonl("claims.jsonl", [
        {"id": cid, "statement": s, "rating": r, "fact_checker_id": fc,
         "fact_check_url": f"https://{fc[3:]}.example/claims/{cid}"} for cid, s, r, fc in CLAIMS])
    write_jsonl("articles.jsonl", [
        {"id": aid, "source_id": src, "url": f"https://{src[4:]}.example/{aid}", "title": title, "body": body,
         "published_at": pub, "authors": [], "split": split}
        for aid, src, split, pub, title, body in ARTICLES])
    write_jsonl("pair_labels.jsonl", [
        {"article_id": a, "claim_id": c, "presence": p, "stance": s, "origin": "manual"}
        for a, c, p, s in LABELS])

    vectors = build_vectors(vocab)
    with open(OUT / "vectors.txt", "w", encoding="utf-8") as f:
        f.write(f"{len(vectors)} {DIM}\n")
        for w, v in vectors.items():
            f.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")
    write_ingest()
    write_fnc()
    (OUT / "medical_terms.txt").write_text("\n".join(sorted(MEDICAL_TERMS)) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
