#!/usr/bin/env python3
"""Author the bundled mini-corpus: article bodies, sidecar metadata, the
linking vocabulary, and per-chunk canned extraction responses.

Also prints section lengths and approximate pair cosines so the fixture
texts can be tuned against the chunker and relation thresholds.
"""
import json
import math
import os
import re

ROOT = os.path.join(os.path.dirname(__file__), "..", "fixtures", "mini_corpus")
ARTICLES = os.path.join(ROOT, "articles")
RESPONSES = os.path.join(ROOT, "responses")


def tokenize(text):
    return [t.lower() for t in re.split(r"[^0-9A-Za-z]+", text) if t]


def cosine(a, b):
    ta, tb = tokenize(a), tokenize(b)
    ca, cb = {}, {}
    for t in ta:
        ca[t] = ca.get(t, 0) + 1
    for t in tb:
        cb[t] = cb.get(t, 0) + 1
    dot = sum(ca[t] * cb.get(t, 0) for t in ca)
    na = math.sqrt(sum(v * v for v in ca.values()))
    nb = math.sqrt(sum(v * v for v in cb.values()))
    return dot / (na * nb) if na and nb else 0.0


def pad(sentences, target):
    """Join sentences; caller is responsible for hitting length targets."""
    return " ".join(sentences)


VOCAB = [
    ("G:AKT1", "AKT1", "Gene", ["AKT", "protein kinase B"], "hgnc"),
    ("G:CTNNB1", "CTNNB1", "Gene", ["beta-catenin"], "hgnc"),
    ("G:TP53", "TP53", "Gene", ["p53", "tumor protein p53"], "hgnc"),
    ("G:VEGFA", "VEGFA", "Gene", ["VEGF-A", "vascular endothelial growth factor A"], "hgnc"),
    ("D:ATEZOLIZUMAB", "atezolizumab", "Drug", ["tecentriq"], "chembl"),
    ("D:BEVACIZUMAB", "bevacizumab", "Drug", ["avastin"], "chembl"),
    ("D:LENVATINIB", "lenvatinib", "Drug", ["lenvima"], "chembl"),
    ("D:REGORAFENIB", "regorafenib", "Drug", ["stivarga"], "chembl"),
    ("D:SORAFENIB", "sorafenib", "Drug", ["nexavar", "bay 43-9006"], "chembl"),
    ("DI:HCC", "hepatocellular carcinoma", "Disease", ["hcc", "liver cancer"], "mesh"),
    ("P:ANGIOGENESIS", "angiogenesis", "Phenotype", ["neovascularization"], "mesh"),
    ("P:APOPTOSIS", "apoptosis", "Phenotype", ["programmed cell death"], "mesh"),
    ("P:PROLIFERATION", "cell proliferation", "Phenotype", ["proliferation"], "mesh"),
    ("PW:PI3K_AKT", "PI3K-AKT signaling", "Pathway", ["pi3k pathway"], "reactome"),
    ("PW:RAS_MAPK", "RAS-MAPK signaling", "Pathway", ["mapk pathway", "ras pathway"], "reactome"),
]

# key grounded statements (must appear verbatim in the named sections)
S1 = ("Sorafenib treatment significantly reduced cell proliferation in TP53 "
      "wild-type hepatocellular carcinoma cell lines compared with vehicle "
      "control (p = 0.002, n = 24).")
S2 = ("Flow cytometry demonstrated that sorafenib treatment increased "
      "apoptosis in hepatocellular carcinoma cell lines, accompanied by TP53 "
      "stabilization on western blot analysis (p = 0.008, n = 24).")
S3 = ("Regorafenib administration significantly reduced tumour growth in "
      "hepatocellular carcinoma xenograft models compared with vehicle "
      "control (p = 0.01, n = 12).")
S4 = ("Under hypoxic conditions, sorafenib treatment unexpectedly increased "
      "cell proliferation in resistant hepatocellular carcinoma cell lines "
      "compared with vehicle control (p = 0.03, n = 18).")
S4B = ("Hypoxia activated PI3K-AKT signaling in resistant hepatocellular "
       "carcinoma cultures, and AKT1 phosphorylation increased relative to "
       "vehicle control on western blot analysis (p = 0.02, n = 18).")
S5 = ("In an independent cohort of hepatocellular carcinoma xenograft "
      "models, regorafenib administration significantly reduced tumour "
      "growth compared with vehicle control (p = 0.02, n = 20).")
S5B = ("Regorafenib administration likewise significantly reduced metastatic "
       "spread to the lungs in hepatocellular carcinoma xenograft models "
       "compared with vehicle control (p = 0.04, n = 20).")
S6 = ("Lenvatinib treatment significantly reduced VEGFA-driven angiogenesis "
      "and tumour growth in hepatocellular carcinoma xenograft models "
      "compared with vehicle control (p = 0.004, n = 16).")
# fusion twin of S6: same bag of words, reordered
S7 = ("In hepatocellular carcinoma xenograft models, lenvatinib treatment "
      "significantly reduced VEGFA-driven angiogenesis and tumour growth "
      "compared with vehicle control (p = 0.004, n = 16).")
S8 = ("Lenvatinib treatment significantly reduced AKT1 phosphorylation and "
      "angiogenesis in hepatocellular carcinoma sprouting cultures compared "
      "with vehicle control (p = 0.01, n = 16).")

FILLER_INTRO = ("Hepatocellular carcinoma remains a leading cause of "
                "cancer-related death worldwide. Prior reports have linked "
                "kinase signaling to disease progression.")
FILLER_METHODS = ("Cell culture, xenograft husbandry, dosing schedules, and "
                  "statistical procedures followed institutional protocols; "
                  "two-sided t-tests were used throughout.")
FILLER_REFS = ("1. Example A et al. 2015. 2. Example B et al. 2017. 3. "
               "Example C et al. 2018.")


def abstract_for(doc, body_sentences, chars=520):
    text = " ".join(body_sentences)
    fill = ("This study examines kinase-directed therapy in hepatocellular "
            "carcinoma and reports quantitative outcomes with full "
            "experimental context for downstream synthesis. ")
    while len(text) < chars:
        text = fill + text
    return text


ARTICLE_DEFS = {
    "doc01": {
        "meta": {
            "doi": "10.1000/forge.0001",
            "title": "Sorafenib suppresses proliferation of TP53 wild-type hepatoma cells",
            "authors": ["Ortega L", "Chen R", "Novak P"],
            "journal": "Hepatology Letters",
            "year": 2019,
            "citation_count": 230,
            "impact_factor": 12.1,
            "quartile": "Q1",
        },
        "abstract": abstract_for("doc01", [
            "Kinase inhibition is a mainstay of systemic therapy for advanced liver tumours.",
            S1,
            "These findings support TP53-dependent drug response in culture models.",
        ]),
        "results": pad([
            "Dose-response assays were performed across five concentrations.",
            S1,
            "The effect was concentration dependent and reproducible across three independent passages, and viability tracked the proliferation readout in every replicate we examined.",
            S2,
            "No comparable change was observed in TP53-null lines under identical conditions, and vehicle-treated cultures remained stable throughout the observation window.",
        ], 700),
        "responses": {
            0: [  # abstract chunk
                {
                    "study_object": "TP53 wild-type hepatocellular carcinoma cell lines",
                    "intervention": "sorafenib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "cell proliferation",
                    "core_entities": [
                        {"raw_name": "sorafenib", "semantic_type": "Drug"},
                        {"raw_name": "TP53", "semantic_type": "Gene"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                        {"raw_name": "cell proliferation", "semantic_type": "Phenotype"},
                    ],
                    "bio_mechanism": None,
                    "phenotype": "reduced cell proliferation",
                    "study_design": "in-vitro",
                    "clinical_stage": "preclinical",
                    "p_value": 0.002,
                    "sample_size": 24,
                    "fold_change": None,
                    "experimental_context": "proliferation assays in TP53 wild-type hepatoma cell lines",
                    "source_text": S1,
                    "extraction_confidence": 0.93,
                },
            ],
            1: [  # results chunk: exact duplicate of S1 plus the apoptosis finding
                {
                    "study_object": "TP53 wild-type hepatocellular carcinoma cell lines",
                    "intervention": "sorafenib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "cell proliferation",
                    "core_entities": [
                        {"raw_name": "sorafenib", "semantic_type": "Drug"},
                        {"raw_name": "TP53", "semantic_type": "Gene"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                        {"raw_name": "cell proliferation", "semantic_type": "Phenotype"},
                    ],
                    "bio_mechanism": None,
                    "phenotype": "reduced cell proliferation",
                    "study_design": "in-vitro",
                    "clinical_stage": "preclinical",
                    "p_value": 0.002,
                    "sample_size": 24,
                    "fold_change": None,
                    "experimental_context": "dose-response proliferation assays",
                    "source_text": S1,
                    "extraction_confidence": 0.91,
                },
                {
                    "study_object": "hepatocellular carcinoma cell lines",
                    "intervention": "sorafenib",
                    "comparison": None,
                    "outcome_metrics": "apoptotic fraction by flow cytometry",
                    "core_entities": [
                        {"raw_name": "sorafenib", "semantic_type": "Drug"},
                        {"raw_name": "TP53", "semantic_type": "Gene"},
                        {"raw_name": "apoptosis", "semantic_type": "Phenotype"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                        {"raw_name": "HepG2", "semantic_type": "Other"},
                    ],
                    "bio_mechanism": "TP53 stabilization",
                    "phenotype": "increased apoptosis",
                    "study_design": "in-vitro",
                    "clinical_stage": "preclinical",
                    "p_value": 0.008,
                    "sample_size": 24,
                    "fold_change": None,
                    "experimental_context": "flow cytometry and western blot in hepatoma cultures",
                    "source_text": S2,
                    "extraction_confidence": 0.9,
                },
            ],
        },
    },
    "doc02": {
        "meta": {
            "doi": "10.1000/forge.0002",
            "title": "Regorafenib limits xenograft growth in hepatocellular carcinoma",
            "authors": ["Imai K", "Fernandez D"],
            "journal": "Journal of Pilot Oncology",
            "year": 2020,
            "citation_count": 95,
            "impact_factor": 3.1,
            "quartile": "Q3",
        },
        # manual curation corrects the journal record
        "manual": {
            "journal": "Liver Cancer Research",
            "impact_factor": 8.4,
            "quartile": "Q2",
        },
        "abstract": abstract_for("doc02", [
            "Multikinase inhibitors are candidates for second-line therapy in advanced disease.",
            "We evaluated regorafenib in animal models of hepatocellular carcinoma and recorded tumour growth trajectories under a fixed dosing schedule.",
        ]),
        "results": pad([
            "Animals were randomized to treatment or vehicle arms at enrolment.",
            S3,
            "Body weight remained stable in both arms across the dosing window, and no dose-limiting toxicity was recorded by the veterinary team during the study period.",
            "Histology confirmed reduced proliferative index in treated tumours at endpoint, and caliper measurements agreed with imaging-derived volumes at every timepoint.",
        ], 650),
        "responses": {
            0: [],
            1: [
                {
                    "study_object": "hepatocellular carcinoma xenograft models",
                    "intervention": "regorafenib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "tumour volume",
                    "core_entities": [
                        {"raw_name": "regorafenib", "semantic_type": "Drug"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": None,
                    "phenotype": "reduced tumour growth",
                    "study_design": "in-vivo",
                    "clinical_stage": "preclinical",
                    "p_value": 0.01,
                    "sample_size": 12,
                    "fold_change": None,
                    "experimental_context": "randomized xenograft dosing study",
                    "source_text": S3,
                    "extraction_confidence": 0.92,
                },
            ],
        },
    },
    "doc03": {
        "meta": {
            "doi": "10.1000/forge.0003",
            "title": "Hypoxia drives sorafenib resistance through PI3K-AKT signaling",
            "authors": ["Weber S", "Liu Q", "Armand T"],
            "journal": "Hepatology Letters",
            "year": 2022,
            "citation_count": 140,
            "impact_factor": 12.1,
            "quartile": "Q1",
        },
        "abstract": abstract_for("doc03", [
            "Resistance to kinase inhibition limits durable responses in liver tumours.",
            "We profiled resistant hepatocellular carcinoma cell lines under controlled oxygen tension and measured proliferation and pathway activation.",
        ]),
        "results": pad([
            "Cultures were conditioned at one percent oxygen for two weeks before assays.",
            S4,
            "The proliferative shift persisted after drug washout in two of three resistant lines, suggesting a stable adaptive state rather than transient signaling noise.",
            S4B,
            "Pathway inhibition restored drug sensitivity in a follow-up panel.",
        ], 700),
        "responses": {
            0: [],
            1: [
                {
                    "study_object": "resistant hepatocellular carcinoma cell lines",
                    "intervention": "sorafenib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "cell proliferation",
                    "core_entities": [
                        {"raw_name": "sorafenib", "semantic_type": "Drug"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                        {"raw_name": "cell proliferation", "semantic_type": "Phenotype"},
                    ],
                    "bio_mechanism": "hypoxia-induced adaptation",
                    "phenotype": "increased cell proliferation",
                    "study_design": "in-vitro",
                    "clinical_stage": "preclinical",
                    "p_value": 0.03,
                    "sample_size": 18,
                    "fold_change": None,
                    "experimental_context": "hypoxic culture of resistant lines",
                    "source_text": S4,
                    "extraction_confidence": 0.88,
                },
                {
                    "study_object": "resistant hepatocellular carcinoma cell lines",
                    "intervention": "hypoxia",
                    "comparison": None,
                    "outcome_metrics": "AKT1 phosphorylation",
                    "core_entities": [
                        {"raw_name": "AKT1", "semantic_type": "Gene"},
                        {"raw_name": "PI3K-AKT signaling", "semantic_type": "Pathway"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": "PI3K-AKT signaling activation",
                    "phenotype": "increased AKT1 phosphorylation",
                    "study_design": "in-vitro",
                    "clinical_stage": "preclinical",
                    "p_value": 0.02,
                    "sample_size": 18,
                    "fold_change": None,
                    "experimental_context": "western blot under hypoxia",
                    "source_text": S4B,
                    "extraction_confidence": 0.86,
                },
            ],
        },
    },
    "doc04": {
        "meta": {
            # no DOI: exercises title-hash identity
            "title": "Independent replication of regorafenib efficacy in hepatocellular carcinoma xenografts",
            "authors": ["Brandt M", "Osei K"],
            "journal": "Translational Liver Models",
            "year": 2023,
            "citation_count": 40,
            "impact_factor": 5.0,
            "quartile": "Q2",
        },
        "abstract": abstract_for("doc04", [
            "Replication of preclinical efficacy findings strengthens translational confidence.",
            "We repeated a published regorafenib dosing protocol in an independent xenograft cohort of hepatocellular carcinoma.",
        ]),
        "results": pad([
            "The replication cohort matched the original protocol for dose and schedule.",
            S5,
            "Effect sizes were comparable to the original report across both measurement windows, and censoring was below five percent in each arm of the study.",
            S5B,
        ], 650),
        "responses": {
            0: [],
            1: [
                {
                    "study_object": "hepatocellular carcinoma xenograft models",
                    "intervention": "regorafenib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "tumour volume",
                    "core_entities": [
                        {"raw_name": "regorafenib", "semantic_type": "Drug"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": None,
                    "phenotype": "reduced tumour growth",
                    "study_design": "in-vivo",
                    "clinical_stage": "preclinical",
                    "p_value": 0.02,
                    "sample_size": 20,
                    "fold_change": None,
                    "experimental_context": "independent xenograft replication cohort",
                    "source_text": S5,
                    "extraction_confidence": 0.94,
                },
                {
                    "study_object": "hepatocellular carcinoma xenograft models",
                    "intervention": "regorafenib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "lung metastasis count",
                    "core_entities": [
                        {"raw_name": "regorafenib", "semantic_type": "Drug"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": None,
                    "phenotype": "reduced metastatic spread",
                    "study_design": "in-vivo",
                    "clinical_stage": "preclinical",
                    "p_value": 0.04,
                    "sample_size": 20,
                    "fold_change": None,
                    "experimental_context": "lung metastasis counts at endpoint",
                    "source_text": S5B,
                    "extraction_confidence": 0.85,
                },
            ],
        },
    },
    "doc05": {
        "meta": {
            "doi": "10.1000/forge.0005",
            "title": "Lenvatinib blocks VEGFA-driven angiogenesis in hepatocellular carcinoma",
            "authors": ["Nakamura T", "Silva P", "Jones A"],
            "journal": "Cancer Angiogenesis",
            "year": 2021,
            "citation_count": 310,
            "impact_factor": 15.3,
            "quartile": "Q1",
        },
        "abstract": abstract_for("doc05", [
            "Angiogenesis sustains tumour expansion in vascularized liver lesions.",
            "We tested lenvatinib against VEGFA-driven vessel growth in xenograft models of hepatocellular carcinoma.",
        ]),
        "results": pad([
            "Microvessel density was quantified by immunohistochemistry at endpoint.",
            S6,
            "Vessel regression preceded the change in tumour volume by roughly one week, and perfusion imaging corroborated the histological readout in every treated animal.",
            "Plasma biomarkers of vascular turnover shifted in the same direction by day ten of dosing.",
        ], 650),
        "responses": {
            0: [],
            1: [
                {
                    "study_object": "hepatocellular carcinoma xenograft models",
                    "intervention": "lenvatinib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "microvessel density and tumour volume",
                    "core_entities": [
                        {"raw_name": "lenvatinib", "semantic_type": "Drug"},
                        {"raw_name": "VEGFA", "semantic_type": "Gene"},
                        {"raw_name": "angiogenesis", "semantic_type": "Phenotype"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": "VEGFA signaling blockade",
                    "phenotype": "reduced angiogenesis and tumour growth",
                    "study_design": "in-vivo",
                    "clinical_stage": "preclinical",
                    "p_value": 0.004,
                    "sample_size": 16,
                    "fold_change": None,
                    "experimental_context": "xenograft angiogenesis study",
                    "source_text": S6,
                    "extraction_confidence": 0.95,
                },
            ],
        },
    },
    "doc06": {
        "meta": {
            "doi": "10.1000/forge.0006",
            "title": "Lenvatinib attenuates angiogenic signaling in liver cancer models",
            "authors": ["Petrov D", "Alvarez M"],
            "journal": "Oncology Reports Weekly",
            "year": 2024,
            "citation_count": 12,
            "impact_factor": 2.4,
            "quartile": "Q3",
        },
        "abstract": abstract_for("doc06", [
            "Vascular signaling remains a tractable axis in hepatocellular carcinoma.",
            "We revisited lenvatinib activity in xenograft models and in culture, with attention to kinase cascade readouts.",
        ]),
        "results": pad([
            "Findings from the xenograft arm mirrored earlier vascular reports.",
            S7,
            "In the culture arm we then asked whether kinase cascade readouts tracked the vascular phenotype across the same dosing range used in animals.",
            S8,
        ], 650),
        "responses": {
            0: [],
            1: [
                {
                    "study_object": "hepatocellular carcinoma xenograft models",
                    "intervention": "lenvatinib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "microvessel density and tumour volume",
                    "core_entities": [
                        {"raw_name": "lenvatinib", "semantic_type": "Drug"},
                        {"raw_name": "VEGFA", "semantic_type": "Gene"},
                        {"raw_name": "angiogenesis", "semantic_type": "Phenotype"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": "VEGFA signaling blockade",
                    "phenotype": "reduced angiogenesis and tumour growth",
                    "study_design": "in-vivo",
                    "clinical_stage": "preclinical",
                    "p_value": 0.004,
                    "sample_size": 16,
                    "fold_change": None,
                    "experimental_context": "xenograft angiogenesis follow-up",
                    "source_text": S7,
                    "extraction_confidence": 0.89,
                },
                {
                    "study_object": "hepatocellular carcinoma cultures",
                    "intervention": "lenvatinib",
                    "comparison": "vehicle control",
                    "outcome_metrics": "AKT1 phosphorylation and angiogenic sprouting",
                    "core_entities": [
                        {"raw_name": "lenvatinib", "semantic_type": "Drug"},
                        {"raw_name": "AKT1", "semantic_type": "Gene"},
                        {"raw_name": "hepatocellular carcinoma", "semantic_type": "Disease"},
                    ],
                    "bio_mechanism": "AKT1 dephosphorylation",
                    "phenotype": "reduced angiogenesis in sprouting cultures",
                    "study_design": "in-vitro",
                    "clinical_stage": "preclinical",
                    "p_value": 0.01,
                    "sample_size": 16,
                    "fold_change": None,
                    "experimental_context": "sprouting assays in culture",
                    "source_text": S8,
                    "extraction_confidence": 0.87,
                },
            ],
        },
    },
}


def build_body(d):
    return "\n".join([
        "Abstract",
        d["abstract"],
        "",
        "Introduction",
        FILLER_INTRO,
        "",
        "Methods",
        FILLER_METHODS,
        "",
        "Results",
        d["results"],
        "",
        "Discussion",
        "The observed effects align with kinase-directed models of disease progression and motivate combination strategies.",
        "",
        "References",
        FILLER_REFS,
        "",
    ])


def main():
    os.makedirs(ARTICLES, exist_ok=True)
    os.makedirs(RESPONSES, exist_ok=True)

    with open(os.path.join(ROOT, "vocab.tsv"), "w") as f:
        f.write("# concept_id\tcanonical_name\tsemantic_type\taliases\tsource_db\n")
        for cid, name, ty, aliases, db in VOCAB:
            f.write(f"{cid}\t{name}\t{ty}\t{'|'.join(aliases)}\t{db}\n")

    for stem, d in sorted(ARTICLE_DEFS.items()):
        body = build_body(d)
        with open(os.path.join(ARTICLES, f"{stem}.txt"), "w") as f:
            f.write(body)
        with open(os.path.join(ARTICLES, f"{stem}.json"), "w") as f:
            json.dump(d["meta"], f, indent=2, sort_keys=True)
            f.write("\n")
        if "manual" in d:
            with open(os.path.join(ARTICLES, f"{stem}.manual.json"), "w") as f:
                json.dump(d["manual"], f, indent=2, sort_keys=True)
                f.write("\n")
        for chunk_index, items in d["responses"].items():
            payload = {"evidence": items}
            with open(os.path.join(RESPONSES, f"{stem}_c{chunk_index}.json"), "w") as f:
                json.dump(payload, f, indent=2, sort_keys=True)
                f.write("\n")
        print(f"{stem}: abstract={len(d['abstract'])} results={len(d['results'])}")
        assert len(d["abstract"]) >= 500, stem
        assert len(d["results"]) >= 500, stem
        assert len(d["results"]) < 3000 and len(d["abstract"]) < 3000, stem
        for s in (FILLER_INTRO, FILLER_METHODS, FILLER_REFS):
            assert len(s) < 500
        # grounding: quoted statements must be verbatim substrings
        for items in d["responses"].values():
            for item in items:
                assert item["source_text"] in body, (stem, item["source_text"][:40])

    def combined(resp):
        parts = [resp.get("intervention"), resp.get("bio_mechanism"),
                 resp.get("phenotype"), resp["source_text"]]
        return " ".join(p for p in parts if p)

    r = {}
    for stem, d in ARTICLE_DEFS.items():
        for ci, items in d["responses"].items():
            for k, item in enumerate(items):
                r[f"{stem}c{ci}i{k}"] = combined(item)

    print("\npair cosines (approximate, exact-token):")
    pairs = [
        ("contradicts r1a-r3a", "doc01c0i0", "doc03c1i0"),
        ("replicates r2-r4a", "doc02c1i0", "doc04c1i0"),
        ("supports r2-r4b", "doc02c1i0", "doc04c1i1"),
        ("fusion-dup r5-r6a", "doc05c1i0", "doc06c1i0"),
        ("extends r5-r6b", "doc05c1i0", "doc06c1i1"),
        ("causal r3b-r6b", "doc03c1i1", "doc06c1i1"),
        ("extends? r1b-r3a", "doc01c1i1", "doc03c1i0"),
    ]
    risk = [
        ("fuse-risk r1a-r1b", "doc01c0i0", "doc01c1i1"),
        ("fuse-risk r4a-r4b", "doc04c1i0", "doc04c1i1"),
        ("fuse-risk r2-r4a", "doc02c1i0", "doc04c1i0"),
        ("fuse-risk r2-r4b", "doc02c1i0", "doc04c1i1"),
        ("fuse-risk r5-r6b", "doc05c1i0", "doc06c1i1"),
        ("fuse-risk r3a-r3b", "doc03c1i0", "doc03c1i1"),
    ]
    for label, a, b in pairs:
        print(f"  {label}: {cosine(r[a], r[b]):.3f}")
    print("\nfusion-risk pairs (must stay < 0.95):")
    for label, a, b in risk:
        c = cosine(r[a], r[b])
        print(f"  {label}: {c:.3f}")
        assert c < 0.95, label


if __name__ == "__main__":
    main()
