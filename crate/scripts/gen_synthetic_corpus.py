"""Writes data/synthetic_corpus.jsonl: a deterministic corpus of annotated
clinical-style summaries with three synthetic models.

  paraphrase             same facts, predicates reworded
  omission               exact predicates, some facts dropped
  hallucination_omission facts dropped and fabricated facts added

Run: python3 scripts/gen_synthetic_corpus.py
"""
import json
from pathlib import Path

PATIENTS = ["Alice Moreno", "Bilal Haddad", "Chen Wei", "Dana Kowalski", "Emeka Obi", "Fatima Noor",
            "Gustavo Lima", "Hana Sato", "Ivan Petrov", "Julia Costa", "Kofi Mensah", "Lena Fischer",
            "Mateo Ruiz", "Nadia Rahman", "Oscar Berg", "Priya Nair", "Quentin Roux", "Rosa Marin",
            "Samir Aziz", "Tara Quinn", "Umar Farouk", "Vera Novak", "Wen Li", "Yusuf Demir"]
PHYSICIANS = ["Dr. Adams", "Dr. Baker", "Dr. Cruz", "Dr. Duval", "Dr. Evans", "Dr. Faber"]
DRUGS = ["Aspirin", "Metformin", "Lisinopril", "Amoxicillin", "Heparin", "Furosemide", "Insulin", "Warfarin"]
DIAGNOSES = ["pneumonia", "heart failure", "type 2 diabetes", "atrial fibrillation", "cellulitis",
             "hypertension", "sepsis", "pulmonary embolism", "acute kidney injury"]
HOSPITALS = ["Riverside General", "Saint Mary Hospital", "Northgate Clinic", "Lakeview Medical Center"]
CITIES = ["Boston", "Cambridge", "Quincy", "Newton"]
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]
PROCEDURES = ["Echocardiogram", "Chest X-ray", "Blood culture", "CT angiography"]

PARAPHRASE = {
    "admitted to": "was admitted to",
    "diagnosed with": "was diagnosed with",
    "treats": "treated",
    "prescribed": "prescribes",
    "admitted on": "was admitted on",
    "located in": "is located in",
    "performed on": "was performed on",
    "discharged on": "was discharged on",
    "started": "was started on",
}


def fact(s, st, p, o, ot=None):
    f = {"subject": {"text": s, "type": st}, "predicate": p, "object": o}
    if ot:
        f["object_type"] = ot
    return f


def source_facts(i):
    patient = PATIENTS[i]
    doc = PHYSICIANS[i % len(PHYSICIANS)]
    drug = DRUGS[i % len(DRUGS)]
    dx = DIAGNOSES[i % len(DIAGNOSES)]
    hosp = HOSPITALS[i % len(HOSPITALS)]
    day = DAYS[i % len(DAYS)]
    facts = [
        fact(patient, "Person", "admitted to", hosp, "Org"),
        fact(patient, "Person", "diagnosed with", dx, "Diagnosis"),
        fact(drug, "Drug", "treats", dx, "Diagnosis"),
        fact(doc, "Person", "prescribed", drug, "Drug"),
        fact(patient, "Person", "admitted on", day, "Time"),
    ]
    if i % 2 == 0:
        facts.append(fact(hosp, "Org", "located in", CITIES[i % len(CITIES)], "Place"))
    if i % 3 == 0:
        facts.append(fact(PROCEDURES[i % len(PROCEDURES)], "Procedure", "performed on", patient, "Person"))
    if i % 4 == 1:
        facts.append(fact(patient, "Person", "discharged on", DAYS[(i + 3) % len(DAYS)], "Time"))
    if i % 5 == 2:
        facts.append(fact(doc, "Person", "started", DRUGS[(i + 3) % len(DRUGS)], "Drug"))
    return facts


def paraphrased(facts):
    return [dict(f, predicate=PARAPHRASE[f["predicate"]]) for f in facts]


def omitted(facts, i, how_many):
    keep = [f for j, f in enumerate(facts) if (j + i) % len(facts) >= how_many]
    return keep


def hallucinated(i):
    patient = PATIENTS[i]
    out = [fact(patient, "Person", "diagnosed with", DIAGNOSES[(i + 4) % len(DIAGNOSES)], "Diagnosis")]
    if i % 2 == 1:
        out.append(fact(DRUGS[(i + 5) % len(DRUGS)], "Drug", "causes", "rash", "Symptom"))
    if i % 3 == 2:
        out.append(fact(patient, "Person", "transferred to", HOSPITALS[(i + 1) % len(HOSPITALS)], "Org"))
    return out


def records():
    for i in range(len(PATIENTS)):
        doc_id = f"bhc-{i:03d}"
        facts = source_facts(i)
        src = {"doc_id": doc_id, "side": "source", "facts": facts}
        if i % 3 == 1:
            src["entities"] = [{"text": DAYS[(i + 2) % len(DAYS)], "type": "Time"},
                               {"text": "ICU", "type": "Org"}]
        yield src
        yield {"doc_id": doc_id, "side": "target", "model": "paraphrase", "facts": paraphrased(facts)}
        yield {"doc_id": doc_id, "side": "target", "model": "omission",
               "facts": omitted(facts, i, 1 + i % 3)}
        yield {"doc_id": doc_id, "side": "target", "model": "hallucination_omission",
               "facts": omitted(facts, i, 1 + (i + 1) % 3) + hallucinated(i)}


if __name__ == "__main__":
    out = Path(__file__).resolve().parent.parent / "data" / "synthetic_corpus.jsonl"
    with out.open("w", encoding="utf-8") as fh:
        for r in records():
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
    print(f"wrote {out}")
