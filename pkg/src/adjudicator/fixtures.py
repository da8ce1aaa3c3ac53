"""Synthetic fixture corpus and dataset.

Everything here is invented but structurally faithful to real benefits
adjudication material: statutes enumerate their elements as "(n) ..."
clauses, considerations and case law ride alongside in the same guide
group, and each case narrative is an intro, one fact sentence per
established element, and the question. Withheld facts are recorded as
"<checklist item id> :: <paraphrased description>" so tests can map gaps
back to ground truth without the description text ever appearing in a
prompt.

The shipped JSON files under ``fixtures/`` are frozen from these builders;
a regression test keeps them in sync. Run ``python -m adjudicator.fixtures``
to regenerate.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

# ---------------------------------------------------------------------------
# Corpus

MISCONDUCT_STATUTE_ID = "crs-8-73-108-e9"
QUIT_STATUTE_ID = "crs-8-73-108-q4"
AVAILABILITY_STATUTE_ID = "crs-8-73-107-a"

CORPUS_FILES: dict[str, list[dict]] = {
    "misconduct.json": [
        {
            "id": MISCONDUCT_STATUTE_ID,
            "kind": "statute",
            "citation": "C.R.S. 8-73-108(5)(e)(IX)",
            "title": "Discharge for non-prescribed controlled substance use",
            "text": (
                "A claimant discharged for the use of a non-prescribed controlled "
                "substance is disqualified from benefit payments when each of the "
                "following elements is established: "
                "(1) The claimant used a controlled substance during working hours. "
                "(2) The controlled substance was not prescribed to the claimant by a "
                "physician. "
                "(3) The employer maintained a written policy prohibiting controlled "
                "substance use. "
                "(4) The written policy was communicated to the claimant before the "
                "discharge. "
                "(5) The discharge resulted directly from the controlled substance use."
            ),
            "source_doc": "guide-misconduct",
        },
        {
            "id": "con-misconduct-impairment",
            "kind": "consideration",
            "citation": "Guide MC-12",
            "title": "Impairment on duty",
            "text": (
                "Consider whether observed impairment on duty, rather than substance "
                "use alone, contributed to the discharge decision; impairment that "
                "endangers coworkers weighs toward disqualification."
            ),
            "source_doc": "guide-misconduct",
        },
        {
            "id": "con-misconduct-warning",
            "kind": "consideration",
            "citation": "Guide MC-14",
            "title": "Prior warnings",
            "text": (
                "Consider whether prior warnings or progressive discipline preceded "
                "the discharge, and whether the employer applied its rules evenly "
                "across the workforce."
            ),
            "source_doc": "guide-misconduct",
        },
        {
            "id": "case-keystone-v-dole",
            "kind": "caselaw",
            "citation": "Keystone Mills v. Dole, 812 P.2d 441",
            "title": "Keystone Mills v. Dole",
            "text": (
                "An employer seeking disqualification bears the burden of producing "
                "the governing policy document in the record. Later panels confirm "
                "this allocation of the burden."
            ),
            "source_doc": "guide-misconduct",
        },
        {
            "id": "ex-substance-discharge",
            "kind": "example",
            "citation": "Guide MC-ex-3",
            "title": "Worked example: off-duty use",
            "text": (
                "Example: a cook consumed a substance at home on a day off and was "
                "later discharged; the guide treats off-duty consumption as outside "
                "the working-hours element."
            ),
            "source_doc": "guide-misconduct",
        },
    ],
    "voluntary_quit.json": [
        {
            "id": QUIT_STATUTE_ID,
            "kind": "statute",
            "citation": "C.R.S. 8-73-108(4)(d)",
            "title": "Voluntary quit with good cause: substantial pay reduction",
            "text": (
                "A claimant who quits employment retains benefit rights when each of "
                "the following elements is established: "
                "(1) The employer imposed a substantial reduction in the rate of pay. "
                "(2) The reduction exceeded twenty percent of the prior wage rate. "
                "(3) The claimant objected to the reduction before quitting. "
                "(4) The claimant gave the employer an opportunity to restore the "
                "prior rate."
            ),
            "source_doc": "guide-voluntary-quit",
        },
        {
            "id": "con-quit-general",
            "kind": "consideration",
            "citation": "Guide VQ-7",
            "title": "Scope of the reduction",
            "text": (
                "Consider whether the reduction applied to all workers in the "
                "establishment or targeted one individual, and whether general "
                "economic conditions motivated the change."
            ),
            "source_doc": "guide-voluntary-quit",
        },
        {
            "id": "case-arvada-v-pugh",
            "kind": "caselaw",
            "citation": "Arvada Transit v. Pugh, 799 P.2d 105",
            "title": "Arvada Transit v. Pugh",
            "text": (
                "A wage reduction accepted without protest for several pay periods "
                "ceases to supply good cause for quitting. The protest must be "
                "contemporaneous with the change."
            ),
            "source_doc": "guide-voluntary-quit",
        },
    ],
    "availability.json": [
        {
            "id": AVAILABILITY_STATUTE_ID,
            "kind": "statute",
            "citation": "C.R.S. 8-73-107(1)(c)",
            "title": "Availability for work",
            "text": (
                "A claimant remains entitled to benefit payments only when each of "
                "the following elements is established: "
                "(1) The claimant is able to perform suitable work. "
                "(2) The claimant is available for all shifts customary in the "
                "occupation. "
                "(3) The claimant made an active search for suitable work each week."
            ),
            "source_doc": "guide-availability",
        },
        {
            "id": "con-avail-restrictions",
            "kind": "consideration",
            "citation": "Guide AV-3",
            "title": "Self-imposed restrictions",
            "text": (
                "Consider whether self-imposed restrictions on hours, wages, or "
                "commuting distance remove the claimant from the local labor market."
            ),
            "source_doc": "guide-availability",
        },
        {
            "id": "reg-7-3-1",
            "kind": "regulation",
            "citation": "7 CCR 1101-2 7.3.1",
            "title": "Work registration",
            "text": (
                "A claimant shall register for work with the state workforce center "
                "within the period the division prescribes and shall keep the "
                "registration current."
            ),
            "source_doc": "guide-availability",
        },
        {
            "id": "case-denver-v-ruiz",
            "kind": "caselaw",
            "citation": "Denver Catering v. Ruiz, 821 P.2d 17",
            "title": "Denver Catering v. Ruiz",
            "text": (
                "A claimant restricted to one narrow shift window has withdrawn from "
                "the labor market absent proof that such work predominates locally. "
                "The restriction defeats availability."
            ),
            "source_doc": "guide-availability",
        },
    ],
}

# ---------------------------------------------------------------------------
# Per-element fact sentences and withheld-fact descriptions
# (keyed by the checklist item id the rule oracle derives from the statute)

FACT_SENTENCES: dict[str, str] = {
    f"{MISCONDUCT_STATUTE_ID}-r1": "He used a controlled substance during working hours.",
    f"{MISCONDUCT_STATUTE_ID}-r2": (
        "The controlled substance had not been prescribed to him by any physician."
    ),
    f"{MISCONDUCT_STATUTE_ID}-r3": (
        "His employer maintained a written policy prohibiting controlled substance use."
    ),
    f"{MISCONDUCT_STATUTE_ID}-r4": (
        "The written policy had been communicated to him before the discharge."
    ),
    f"{MISCONDUCT_STATUTE_ID}-r5": (
        "The discharge resulted directly from that controlled substance use."
    ),
    f"{QUIT_STATUTE_ID}-r1": "Her employer imposed a substantial reduction in her rate of pay.",
    f"{QUIT_STATUTE_ID}-r2": "The reduction exceeded twenty percent of her prior wage rate.",
    f"{QUIT_STATUTE_ID}-r3": "She objected to the reduction before quitting.",
    f"{QUIT_STATUTE_ID}-r4": "She gave the employer an opportunity to restore the prior rate.",
    f"{AVAILABILITY_STATUTE_ID}-r1": "He is able to perform suitable work.",
    f"{AVAILABILITY_STATUTE_ID}-r2": "He is available for all shifts customary in the occupation.",
    f"{AVAILABILITY_STATUTE_ID}-r3": "He made an active search for suitable work each week.",
}

WITHHELD_DESCRIPTIONS: dict[str, str] = {
    f"{MISCONDUCT_STATUTE_ID}-r1": "whether any drug consumption happened while on shift",
    f"{MISCONDUCT_STATUTE_ID}-r2": "whether a doctor had authorized the drug",
    f"{MISCONDUCT_STATUTE_ID}-r3": "whether the company kept a written rule against drug use",
    f"{MISCONDUCT_STATUTE_ID}-r4": "whether the claimant knew of the rule in advance",
    f"{MISCONDUCT_STATUTE_ID}-r5": "whether the firing flowed from the drug incident",
    f"{QUIT_STATUTE_ID}-r1": "whether the company cut the pay level at all",
    f"{QUIT_STATUTE_ID}-r2": "how large the pay cut was relative to earlier earnings",
    f"{QUIT_STATUTE_ID}-r3": "whether the claimant protested the cut before leaving",
    f"{QUIT_STATUTE_ID}-r4": "whether the company got a chance to undo the cut",
    f"{AVAILABILITY_STATUTE_ID}-r1": "whether the claimant can physically do suitable jobs",
    f"{AVAILABILITY_STATUTE_ID}-r2": "what shift times the claimant will accept",
    f"{AVAILABILITY_STATUTE_ID}-r3": "what weekly job-hunting activity the claimant undertook",
}

ISSUE_STATUTES = {
    "misconduct": MISCONDUCT_STATUTE_ID,
    "voluntary-quit": QUIT_STATUTE_ID,
    "availability": AVAILABILITY_STATUTE_ID,
}

ISSUE_ELEMENT_COUNTS = {"misconduct": 5, "voluntary-quit": 4, "availability": 3}

QUESTIONS = {
    ("misconduct", "eligibility"): "Is he eligible for benefit payments?",
    ("misconduct", "direct"): "Did the discharge involve disqualifying conduct under the statute?",
    ("voluntary-quit", "eligibility"): "Is she eligible for benefit payments?",
    ("voluntary-quit", "direct"): "Did she keep her benefit rights when she quit?",
    ("availability", "eligibility"): "Is he eligible for benefit payments?",
    ("availability", "direct"): "Does he remain entitled to benefit payments?",
}


def withheld_entry(item_id: str) -> str:
    return f"{item_id} :: {WITHHELD_DESCRIPTIONS[item_id]}"


def withheld_item_id(entry: str) -> str:
    return entry.split(" :: ", 1)[0]


def build_narrative(issue: str, intro: str, withheld: list[int], question_type: str) -> str:
    statute = ISSUE_STATUTES[issue]
    sentences = [intro]
    for n in range(1, ISSUE_ELEMENT_COUNTS[issue] + 1):
        if n not in withheld:
            sentences.append(FACT_SENTENCES[f"{statute}-r{n}"])
    sentences.append(QUESTIONS[(issue, question_type)])
    return " ".join(sentences)


def build_case(
    case_id: str,
    issue: str,
    intro: str,
    *,
    question_type: str = "eligibility",
    gold_label: str,
    withheld: list[int] | None = None,
) -> dict:
    withheld = withheld or []
    statute = ISSUE_STATUTES[issue]
    completeness = "complete" if not withheld else f"missing-{len(withheld)}"
    return {
        "id": case_id,
        "narrative": build_narrative(issue, intro, withheld, question_type),
        "question_type": question_type,
        "issue_tags": [issue],
        "_meta": {
            "gold_label": gold_label,
            "completeness": completeness,
            "withheld_facts": [withheld_entry(f"{statute}-r{n}") for n in sorted(withheld)],
        },
    }


def build_dataset() -> list[dict]:
    mc, vq, av = "misconduct", "voluntary-quit", "availability"
    return [
        build_case("ms-c1", mc, "Marcus ran a forklift at a freight depot until his discharge in May.",
                   gold_label="ineligible"),
        build_case("ms-c2", mc, "Ray stocked shelves at a grocery warehouse until the company let him go.",
                   gold_label="ineligible"),
        build_case("ms-c3", mc, "Theo drove a delivery route until the company ended his employment.",
                   question_type="direct", gold_label="yes"),
        build_case("vq-c1", vq, "Lena assembled cabinets at a furniture plant before she resigned.",
                   gold_label="eligible"),
        build_case("vq-c2", vq, "Priya handled billing for a clinic before she resigned.",
                   gold_label="eligible"),
        build_case("vq-c3", vq, "Wanda managed inventory at a hardware store before she resigned.",
                   question_type="direct", gold_label="yes"),
        build_case("av-c1", av, "Omar lost his warehouse job in a seasonal layoff and filed a claim.",
                   gold_label="eligible"),
        build_case("av-c2", av, "Felix was laid off from a print shop and filed a claim.",
                   gold_label="eligible"),
        build_case("av-c3", av, "Gus lost a landscaping job at the end of the season and filed a claim.",
                   question_type="direct", gold_label="yes"),
        build_case("ms-m1a", mc, "Dion tended bar at an airport lounge until his discharge.",
                   gold_label="inconclusive", withheld=[3]),
        build_case("vq-m1a", vq, "Sara ran a stamping press before she resigned.",
                   gold_label="inconclusive", withheld=[2]),
        build_case("av-m1a", av, "Noel was laid off from a call center and filed a claim.",
                   gold_label="inconclusive", withheld=[3]),
        build_case("ms-m2a", mc, "Evan welded frames at a trailer factory until his discharge.",
                   gold_label="inconclusive", withheld=[2, 4]),
        build_case("vq-m2a", vq, "Mia packed orders at a distribution center before she resigned.",
                   gold_label="inconclusive", withheld=[3, 4]),
        build_case("ms-m2b", mc, "Kofi cleaned rail cars on a night crew until his discharge.",
                   gold_label="inconclusive", withheld=[1, 5]),
        build_case("ms-m3a", mc, "Juan loaded trucks at a produce market until his discharge.",
                   gold_label="inconclusive", withheld=[1, 3, 5]),
        build_case("vq-m3a", vq, "Tess groomed dogs at a pet salon before she resigned.",
                   gold_label="inconclusive", withheld=[2, 3, 4]),
        build_case("av-m3a", av, "Dana filed a claim after a seasonal layoff from an orchard.",
                   gold_label="inconclusive", withheld=[1, 2, 3]),
        build_case("ms-m4a", mc, "Ivan repaired vending machines until his discharge.",
                   gold_label="inconclusive", withheld=[1, 2, 3, 4]),
        build_case("vq-m4a", vq, "Rosa baked bread at a commissary until she quit her employment "
                   "over a dispute about her rate of pay.",
                   gold_label="inconclusive", withheld=[1, 2, 3, 4]),
    ]


# ---------------------------------------------------------------------------
# The five-element scenario used by the single-removal acceptance check


def substance_case_variants() -> list[dict]:
    """A complete five-element discharge case plus its 5 single-removals."""
    intro = "Alex operated a packaging line until his discharge in March."
    cases = [
        build_case("fig-substance-complete", "misconduct", intro, gold_label="ineligible")
    ]
    for n in range(1, 6):
        cases.append(
            build_case(
                f"fig-substance-m{n}",
                "misconduct",
                intro,
                gold_label="inconclusive",
                withheld=[n],
            )
        )
    return cases


# ---------------------------------------------------------------------------
# Shipped file locations


def corpus_path() -> Path:
    return Path(str(resources.files("adjudicator").joinpath("fixtures", "corpus")))


def dataset_path() -> Path:
    return Path(str(resources.files("adjudicator").joinpath("fixtures", "dataset.json")))


def write_fixture_files(root: Path | None = None) -> None:
    root = root or Path(__file__).parent / "fixtures"
    corpus_dir = root / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for name, passages in CORPUS_FILES.items():
        (corpus_dir / name).write_text(json.dumps(passages, indent=2) + "\n", encoding="utf-8")
    (root / "dataset.json").write_text(
        json.dumps(build_dataset(), indent=2) + "\n", encoding="utf-8"
    )


if __name__ == "__main__":
    write_fixture_files()
    print("fixture files written")
