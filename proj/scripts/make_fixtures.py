#!/usr/bin/env python3
"""Regenerates the bundled fixture corpus: knowledge bases, the 20-case
dataset, the mock backend fixture tree, and the mock run config.

Deterministic by construction; run from the repository root:

    python3 scripts/make_fixtures.py
"""

import json
import os
import shutil

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
FIXTURES = os.path.join(ROOT, "fixtures")

# One entry per crime theme: ids, shared keyword vocabulary, statutory data.
THEMES = [
    {
        "key": "theft",
        "articles": [("art_264", "Theft", "whoever secretly steals property of another commits theft: stealing money phones or goods from a store home or pocket is punished with fixed term imprisonment"),
                     ("art_265", "Theft of utilities", "whoever steals electricity gas or telecommunication services by secretly tapping lines commits theft of utilities and is punished as theft")],
        "charge": ("ch_theft", "theft", "the crime of theft: secretly taking property of another such as stealing phones wallets or goods from a store", 18),
        "alt_charge": ("ch_theft_minor", "minor theft", "petty theft of property of small value taken secretly without violence", 8),
    },
    {
        "key": "robbery",
        "articles": [("art_263", "Robbery", "whoever robs property using violence coercion or a weapon against a victim commits robbery and is punished severely"),
                     ("art_267", "Snatching", "whoever snatches property openly from a victim without violence commits snatching and is punished with imprisonment")],
        "charge": ("ch_robbery", "robbery", "the crime of robbery: taking property from a victim by violence threat or weapon", 60),
        "alt_charge": ("ch_snatching", "snatching", "openly snatching property from a victim and fleeing without using violence", 24),
    },
    {
        "key": "fraud",
        "articles": [("art_266", "Fraud", "whoever obtains property by fabricating facts or concealing truth to deceive a victim commits fraud"),
                     ("art_192", "Fundraising fraud", "whoever illegally raises funds by deception from investors with intent to possess commits fundraising fraud")],
        "charge": ("ch_fraud", "fraud", "the crime of fraud: deceiving a victim with fabricated facts or concealed truth to obtain money or property", 30),
        "alt_charge": ("ch_contract_fraud", "contract fraud", "fraud committed in signing and performing a contract by deception about performance ability", 36),
    },
    {
        "key": "assault",
        "articles": [("art_234", "Intentional injury", "whoever intentionally injures the body of another person causing harm commits intentional injury"),
                     ("art_293", "Provoking trouble", "whoever beats another person at will creating disturbance in public commits provoking trouble")],
        "charge": ("ch_assault", "intentional injury", "the crime of intentional injury: attacking and injuring the body of another person in a fight or dispute", 24),
        "alt_charge": ("ch_brawl", "affray", "gathering to brawl and disturb public order by fighting", 12),
    },
    {
        "key": "drugs",
        "articles": [("art_347", "Drug trafficking", "whoever smuggles sells transports or manufactures narcotic drugs such as heroin or methamphetamine is punished"),
                     ("art_348", "Drug possession", "whoever illegally possesses a large quantity of narcotic drugs commits illegal possession of drugs")],
        "charge": ("ch_drug_traffic", "drug trafficking", "the crime of drug trafficking: selling transporting or manufacturing narcotic drugs like heroin or methamphetamine", 84),
        "alt_charge": ("ch_drug_possess", "drug possession", "illegally possessing narcotic drugs in quantity without selling", 36),
    },
    {
        "key": "bribery",
        "articles": [("art_385", "Accepting bribes", "a state functionary who accepts money or property to seek benefits for others commits acceptance of bribes"),
                     ("art_389", "Offering bribes", "whoever gives money or property to a state functionary to obtain improper benefits commits offering bribes")],
        "charge": ("ch_bribery", "acceptance of bribes", "the crime of accepting bribes: a state functionary taking money or gifts to seek benefits for another", 48),
        "alt_charge": ("ch_bribe_give", "offering bribes", "giving money or property to a functionary to obtain improper benefits", 30),
    },
    {
        "key": "arson",
        "articles": [("art_114", "Arson", "whoever sets fire endangering public security by burning property commits arson even before serious consequences"),
                     ("art_115", "Arson with consequences", "arson causing serious injury death or major property loss is punished more severely")],
        "charge": ("ch_arson", "arson", "the crime of arson: setting fire to buildings goods or fields endangering public security", 72),
        "alt_charge": None,
    },
    {
        "key": "kidnapping",
        "articles": [("art_239", "Kidnapping", "whoever kidnaps a person for ransom or holds a hostage commits kidnapping and is punished severely"),
                     ("art_240", "Trafficking persons", "whoever abducts and sells a person commits trafficking and is punished severely")],
        "charge": ("ch_kidnap", "kidnapping", "the crime of kidnapping: seizing a hostage or abducting a person to extort ransom", 120),
        "alt_charge": None,
    },
    {
        "key": "smuggling",
        "articles": [("art_151", "Smuggling prohibited goods", "whoever smuggles weapons ammunition or cultural relics across the border evading customs commits smuggling"),
                     ("art_153", "Smuggling ordinary goods", "whoever smuggles ordinary goods evading customs duty in large amounts commits smuggling of goods")],
        "charge": ("ch_smuggle", "smuggling", "the crime of smuggling: transporting goods or weapons across the border evading customs control", 42),
        "alt_charge": ("ch_tax_evasion", "duty evasion", "evading customs duty on imported goods in large amounts", 18),
    },
    {
        "key": "embezzlement",
        "articles": [("art_271", "Occupational embezzlement", "an employee who takes company funds or property into his own possession by taking advantage of his position commits embezzlement"),
                     ("art_272", "Misappropriation of funds", "an employee who misappropriates company funds for personal use exceeding three months commits misappropriation")],
        "charge": ("ch_embezzle", "occupational embezzlement", "the crime of occupational embezzlement: an employee taking company funds or property using his position", 36),
        "alt_charge": ("ch_misappropriate", "misappropriation", "an employee temporarily diverting company funds for personal use", 15),
    },
    {
        "key": "driving",
        "articles": [("art_133", "Dangerous driving", "whoever drives a motor vehicle on a road while intoxicated or racing commits dangerous driving"),
                     ("art_135", "Major accident", "whoever violates traffic regulations causing a major accident with injury or death is punished")],
        "charge": ("ch_drunk_driving", "dangerous driving", "the crime of dangerous driving: driving a motor vehicle drunk on alcohol or racing on a road", 4),
        "alt_charge": ("ch_traffic_accident", "traffic casualty", "causing a traffic accident with serious injury by violating regulations", 24),
    },
    {
        "key": "counterfeiting",
        "articles": [("art_140", "Counterfeit products", "whoever produces or sells fake or substandard products mixing impurities or passing fake goods as genuine is punished"),
                     ("art_214", "Counterfeit trademarks", "whoever sells goods bearing counterfeit registered trademarks in large amounts is punished")],
        "charge": ("ch_counterfeit", "selling counterfeit products", "the crime of producing or selling counterfeit or substandard products passed off as genuine", 20),
        "alt_charge": None,
    },
]

THEME_BY_KEY = {t["key"]: t for t in THEMES}

PRECEDENTS = [
    # (id, theme, penalty, extra facts)
    ("prec_001", "theft", {"kind": "months", "months": 16}, "the defendant secretly took two phones from a store shelf at noon and sold them"),
    ("prec_002", "theft", {"kind": "months", "months": 24}, "the defendant stole a wallet with money from a pocket on a crowded bus"),
    ("prec_003", "robbery", {"kind": "months", "months": 66}, "the defendant robbed a victim at night with a knife taking a phone and money"),
    ("prec_004", "robbery", {"kind": "life"}, "the defendant robbed a bank with a weapon injuring two guards severely"),
    ("prec_005", "fraud", {"kind": "months", "months": 28}, "the defendant deceived a victim with a fabricated investment obtaining large money"),
    ("prec_006", "fraud", {"kind": "months", "months": 40}, "the defendant concealed the truth about goods and obtained property from many victims"),
    ("prec_007", "assault", {"kind": "months", "months": 20}, "the defendant injured the victim's arm in a street fight after a dispute"),
    ("prec_008", "drugs", {"kind": "months", "months": 90}, "the defendant transported methamphetamine across provinces and sold drugs to buyers"),
    ("prec_009", "bribery", {"kind": "months", "months": 44}, "the functionary accepted money and gifts to seek benefits for a contractor"),
    ("prec_010", "arson", {"kind": "months", "months": 78}, "the defendant set fire to a warehouse at night endangering public security"),
    ("prec_011", "kidnapping", {"kind": "months", "months": 126}, "the defendant kidnapped a child and demanded ransom from the family"),
    ("prec_012", "smuggling", {"kind": "months", "months": 38}, "the defendant smuggled goods across the border evading customs duty"),
    ("prec_013", "embezzlement", {"kind": "months", "months": 30}, "the employee took company funds into his own account using his position"),
    ("prec_014", "driving", {"kind": "months", "months": 3}, "the defendant drove a motor vehicle drunk on a road and was stopped at a checkpoint"),
    ("prec_015", "counterfeiting", {"kind": "months", "months": 22}, "the defendant sold substandard products passed off as genuine brands"),
    ("prec_016", "theft", {"kind": "none"}, "the defendant attempted to steal goods from a store but returned them and was exempted"),
]

# name, theme, months-or-sentinel, mitigating factors in the narrative,
# objection plan: one of "accept", "weak", "strong"
CASES = [
    ("case_001", "theft", 14, ["surrender"], "accept",
     "Zhang San entered a mobile phone store at night and secretly took three phones from the shelf. He later surrendered to the police and confessed where the stolen phones were hidden. He stole because of gambling debts."),
    ("case_002", "robbery", 70, [], "weak",
     "Li Si stopped a victim in an alley with a knife, threatened violence, and robbed the victim of a phone and money. He fled on a motorcycle and was caught two days later. He needed money for drugs."),
    ("case_003", "fraud", 26, ["confession", "restitution"], "accept",
     "Wang Wu fabricated an investment platform and deceived four victims into transferring money. After arrest he confessed and returned most of the money as restitution. He acted out of greed."),
    ("case_004", "assault", 22, [], "strong",
     "Zhao Liu injured a neighbor's arm with a stick during a parking dispute, causing minor injury. Witnesses saw the fight start after an exchange of insults. He acted in sudden anger."),
    ("case_005", "drugs", 96, [], "accept",
     "Qian Qi transported two kilograms of methamphetamine in a truck across the border and sold drugs to local dealers. He was arrested at a checkpoint. He did it for payment from a trafficking ring."),
    ("case_006", "bribery", 40, ["confession"], "weak",
     "Sun Ba, a state functionary, accepted money and gifts from a contractor to seek benefits in a tender. He confessed during the investigation. He wanted money for an apartment."),
    ("case_007", "arson", 80, [], "strong",
     "Zhou Jiu set fire to a rival's warehouse at night, burning stored goods and endangering nearby homes. Firefighters prevented the fire from spreading. He acted out of revenge."),
    ("case_008", "kidnapping", 130, [], "accept",
     "Wu Shi kidnapped a businessman's son and held the hostage in a rented house demanding ransom. Police freed the hostage unharmed after three days. He wanted ransom to pay debts."),
    ("case_009", "smuggling", 36, ["confession"], "weak",
     "Zheng Yi drove a van of untaxed goods across the border at night evading customs control. He confessed at the checkpoint when stopped. He was paid by a smuggling organizer."),
    ("case_010", "embezzlement", 32, ["restitution"], "accept",
     "Feng Er, a company cashier, took company funds into her own account using her position over six months. She returned the funds as restitution after discovery. She used the money for luxury goods."),
    ("case_011", "driving", 3, ["confession", "first offense"], "accept",
     "Chu San drove his motor vehicle home drunk after a banquet and hit a roadside barrier. A blood test showed heavy alcohol. He confessed immediately; it was his first offense."),
    ("case_012", "counterfeiting", 24, [], "weak",
     "Wei Si produced and sold counterfeit liquor passed off as a genuine brand, mixing cheap spirits. Several buyers reported illness. He did it for profit."),
    ("case_013", "theft", 20, [], "strong",
     "Jiang Wu stole a wallet with money from a victim's pocket on a crowded subway and was caught by a plainclothes officer on the spot. He had stolen to repay a loan shark."),
    ("case_014", "fraud", 44, [], "accept",
     "Shen Liu signed contracts concealing that his company could not perform, obtaining deposits from three partners. He spent the money on gambling. He planned the deception from the start."),
    ("case_015", "robbery", 54, ["surrender", "victim forgiveness"], "strong",
     "Han Qi snatched a necklace and pushed the victim to the ground, then robbed her bag under threat. He surrendered the next day and the victim expressed forgiveness after compensation. He acted under debt pressure."),
    ("case_016", "assault", 18, ["victim forgiveness"], "accept",
     "Yang Ba beat a colleague during a quarrel at a construction site, injuring his ribs. The victim accepted an apology and compensation and expressed forgiveness. It was a sudden fight."),
    ("case_017", "drugs", 60, ["minor role"], "weak",
     "Zhu Jiu carried a package of heroin on a bus for a trafficker for a small fee, playing a minor role in the transport chain. She was stopped during an inspection. She needed money for rent."),
    ("case_018", "embezzlement", 40, [], "strong",
     "Qin Shi, a warehouse manager, took company property using his position and resold it through an online shop for two years. An audit exposed the scheme. He wanted extra income."),
    ("case_019", "driving", 36, [], "accept",
     "Xu Yi raced his motor vehicle against a friend on a city road at double the speed limit, causing a crash that seriously injured a pedestrian. He fled and was caught. He raced for a bet."),
    ("case_020", "theft", "life", [], "weak",
     "He Er led a gang that repeatedly stole high-value cultural relics from a museum storage over five years, selling them abroad. The court treated the scale as especially huge. He organized the thefts for wealth."),
]

OBJECTION_TEXTS = {
    # claims that diverge from the judgment wording; "weak" arguments drift
    # off the record, "strong" arguments reuse the case vocabulary
    "weak": {
        "claims": ["The procedural timeline deserves reconsideration given newly submitted receipts.",
                   "Key testimony was recorded incorrectly during the hearing."],
        "args": ["Procedure requires that newly submitted receipts be weighed before finality.",
                 "A recording discrepancy in testimony warrants a second look."],
    },
    "strong": {
        "claims": ["The sentence overlooks circumstances described in the case record.",
                   "The cited provisions do not fully match the conduct described."],
        "args": None,  # filled per case with vocabulary from the narrative
    },
}


def jline(obj):
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def write_jsonl(path, rows):
    write(path, "".join(jline(r) + "\n" for r in rows))


def main():
    shutil.rmtree(FIXTURES, ignore_errors=True)

    # ---------------------------------------------------------------- KBs
    laws, charges, precedents = [], [], []
    for t in THEMES:
        for art_id, title, body in t["articles"]:
            laws.append({"article_id": art_id, "title": title, "body": body})
        cid, name, definition, base = t["charge"]
        charges.append({"charge_id": cid, "name": name, "definition": definition,
                        "base_sentence_months": base})
        if t["alt_charge"]:
            cid, name, definition, base = t["alt_charge"]
            charges.append({"charge_id": cid, "name": name, "definition": definition,
                            "base_sentence_months": base})
    for pid, theme, penalty, fact in PRECEDENTS:
        t = THEME_BY_KEY[theme]
        precedents.append({
            "precedent_id": pid,
            "fact": fact,
            "charges": [t["charge"][0]],
            "articles": [a[0] for a in t["articles"]],
            "penalty": penalty,
        })
    write_jsonl(os.path.join(FIXTURES, "kb", "laws.jsonl"), laws)
    write_jsonl(os.path.join(FIXTURES, "kb", "charges.jsonl"), charges)
    write_jsonl(os.path.join(FIXTURES, "kb", "precedents.jsonl"), precedents)

    # ---------------------------------------------------------------- cases
    rows = []
    for case_id, theme, months, factors, plan, fact in CASES:
        t = THEME_BY_KEY[theme]
        penalty = {"kind": "months", "months": months} if isinstance(months, int) \
            else {"kind": months}
        rows.append({
            "case_id": case_id,
            "fact": fact,
            "articles": [a[0] for a in t["articles"]],
            "charges": [t["charge"][0]],
            "penalty": penalty,
        })
    write_jsonl(os.path.join(FIXTURES, "cases", "cases_20.jsonl"), rows)

    # ---------------------------------------------------------------- mock fixtures
    mock = os.path.join(FIXTURES, "mock")
    for case_id, theme, months, factors, plan, fact in CASES:
        t = THEME_BY_KEY[theme]
        sentences = [s.strip() for s in fact.split(".") if s.strip()]
        who = sentences[0]
        why = sentences[-1]
        details = ". ".join(sentences[1:-1]) or sentences[0]

        extract = {
            "defendant_identification": who,
            "crime_details": details,
            "criminal_motive": why,
        }
        body = jline(extract)
        if case_id == "case_002":
            body = "```json\n" + body + "\n```"  # exercises fence stripping
        if case_id == "case_016":
            extract.pop("criminal_motive")  # exercises the not-stated fallback
            body = jline(extract)
        write(os.path.join(mock, "JJ", "extract", case_id + ".json"), body)

        gaps = []
        if case_id in ("case_004", "case_012"):
            gaps = ["timeline of the dispute is unclear"]
        if case_id == "case_018":
            gaps = ["audit evidence chain needs dates", "resale records incomplete"]
        write(os.path.join(mock, "SJ", "gaps", case_id + ".json"),
              jline({"gaps": gaps}))

        summary = f"{who}. {details}. Motive: {why}."
        write(os.path.join(mock, "SJ", "summarize", case_id + ".txt"), summary)

        listed = list(factors)
        if case_id == "case_003":
            listed = ["Confession", "restitution", "good weather"]  # junk factor
        if case_id == "case_011":
            listed = ["confession", "confession", "first offense"]  # duplicate
        write(os.path.join(mock, "CJ", "mitigating", case_id + ".json"),
              jline({"factors": listed}))

        if plan == "accept":
            claims = []
        else:
            texts = OBJECTION_TEXTS[plan]
            if plan == "strong":
                claims = [texts["claims"][0],
                          f"The record shows {details.lower()}, which the penalty does not reflect."]
            else:
                claims = texts["claims"][:2]
            if case_id == "case_013":
                claims = claims + ["Extra claim three.", "Extra claim four.",
                                   "Extra claim five."]  # exercises the cap
        write(os.path.join(mock, "Defendant", "objections", case_id + ".json"),
              jline({"claims": claims}))

        for i in range(3):
            if plan == "accept":
                break
            if plan == "strong":
                arg = (f"The case record states that {fact.lower()} "
                       f"Under the cited provisions on {t['charge'][1]}, these "
                       f"circumstances support the objection.")
            else:
                arg = OBJECTION_TEXTS["weak"]["args"][i % 2]
            write(os.path.join(mock, "LegalCounsel", "argument",
                               f"{case_id}.o{i}.txt"), arg)

        # knowledge-base ablation prompts
        write(os.path.join(mock, "CJ", "charge_direct", case_id + ".json"),
              jline({"charge_id": t["charge"][0]}))
        write(os.path.join(mock, "CJ", "laws_direct", case_id + ".json"),
              jline({"articles": [a[0] for a in t["articles"]]}))

        # multi-agent ablation: one-shot judgment
        single_months = months if isinstance(months, int) else 180
        write(os.path.join(mock, "CJ", "single", case_id + ".json"),
              jline({"articles": [a[0] for a in t["articles"]],
                     "charge": t["charge"][0],
                     "penalty": {"kind": "months", "months": single_months}}))

    # ---------------------------------------------------------------- config
    config = {
        "profile": "mock",
        "fixtures_dir": "../mock",
        "prompts_dir": "../../resources/prompts",
        "dataset": "../cases/cases_20.jsonl",
        "kb": {
            "laws": "../kb/laws.jsonl",
            "charges": "../kb/charges.jsonl",
            "precedents": "../kb/precedents.jsonl",
        },
        "hyperparameters": {
            "alpha": 0.5,
            "beta": 0.5,
            "gamma_scheme": "similarity_weighted",
            "delta_months": 2.0,
            # the hashed bag-of-tokens embedder never produces negative
            # cosines, so normalized-cosine scores live in [0.5, 1]; the
            # match and objection thresholds sit inside that band
            "theta_law": 0.75,
            "tau": 0.25,
            "eta": 0.75,
            "theta_val": 0.5,
            "epsilon": 0.62,
            "top_k": 10,
        },
        "bm25": {"k1": 1.2, "b": 0.75},
        "penalty_edges": [0, 6, 9, 12, 24, 36, 60, 84, 120, 300],
        "t_max_months": 300,
        "max_tokens": 2048,
        "parallelism": 1,
    }
    write(os.path.join(FIXTURES, "config", "mock.json"),
          json.dumps(config, indent=2, sort_keys=True) + "\n")

    counts = (len(laws), len(charges), len(precedents), len(rows))
    print("fixtures written: laws=%d charges=%d precedents=%d cases=%d" % counts)


if __name__ == "__main__":
    main()
