#!/usr/bin/env python3
# Copyright 2026 The cfmip Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the synthetic credit and heart fixtures under data/.

The files mirror the column layout of the public Statlog tables but the rows
are drawn from a fixed-seed generative model, so the repository needs no
network access. Re-running the script reproduces the committed files.
"""

import csv
import json
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def pick(rng, levels, probs):
    return levels[rng.choice(len(levels), p=probs)]


def credit_rows(rng, n=1000):
    checking = ["<0", "0<=X<200", ">=200", "no checking"]
    history = ["no credits/all paid", "all paid", "existing paid",
               "delayed previously", "critical/other existing credit"]
    purpose = ["new car", "used car", "furniture/equipment", "radio/tv",
               "domestic appliance", "repairs", "education", "retraining",
               "business", "other"]
    savings = ["<100", "100<=X<500", "500<=X<1000", ">=1000",
               "no known savings"]
    employment = ["unemployed", "<1", "1<=X<4", "4<=X<7", ">=7"]
    personal = ["male div/sep", "female div/dep/mar", "male single",
                "male mar/wid"]
    parties = ["none", "co applicant", "guarantor"]
    prop = ["real estate", "life insurance", "car", "no known property"]
    plans = ["bank", "stores", "none"]
    housing = ["rent", "own", "for free"]
    job = ["unemp/unskilled non res", "unskilled resident", "skilled",
           "high qualif/self emp/mgmt"]
    rows = []
    for _ in range(n):
        amount = float(np.clip(rng.lognormal(7.8, 0.6), 250, 18424))
        duration = float(np.clip(2.0 + 0.42 * np.sqrt(amount)
                                 + rng.normal(0, 3.0), 4, 72))
        install = float(np.clip(rng.normal(3.0, 1.0), 1, 4))
        age = float(np.clip(rng.gamma(6.0, 6.0) + 10, 19, 75))
        r = {
            "duration": round(duration, 2),
            "credit_amount": round(amount, 2),
            "installment_commitment": round(install, 2),
            "age": round(age, 2),
            "residence_since": int(rng.integers(1, 5)),
            "existing_credits": int(rng.choice([1, 2, 3, 4],
                                               p=[.63, .33, .03, .01])),
            "num_dependents": int(rng.choice([1, 2], p=[.85, .15])),
            "checking_status": pick(rng, checking, [.27, .27, .06, .40]),
            "credit_history": pick(rng, history, [.04, .05, .53, .09, .29]),
            "employment": pick(rng, employment, [.06, .17, .34, .17, .26]),
            "foreign_worker": pick(rng, ["yes", "no"], [.96, .04]),
            "housing": pick(rng, housing, [.18, .71, .11]),
            "job": pick(rng, job, [.02, .20, .63, .15]),
            "other_parties": pick(rng, parties, [.91, .04, .05]),
            "other_payment_plans": pick(rng, plans, [.14, .05, .81]),
            "own_telephone": pick(rng, ["none", "yes"], [.6, .4]),
            "personal_status": pick(rng, personal, [.05, .31, .55, .09]),
            "property_magnitude": pick(rng, prop, [.28, .23, .33, .16]),
            "purpose": pick(rng, purpose,
                            [.23, .10, .18, .28, .01, .02, .05, .01, .10, .02]),
            "saving_status": pick(rng, savings, [.60, .10, .06, .05, .19]),
        }
        rows.append(r)

    # Latent credit-risk score; the threshold is set so 70% are "good".
    def latent(r):
        s = 0.0
        s -= 0.045 * r["duration"]
        s -= 0.00012 * r["credit_amount"]
        s -= 0.25 * r["installment_commitment"]
        s += 0.018 * r["age"]
        s += {"<0": -0.9, "0<=X<200": -0.4, ">=200": 0.3,
              "no checking": 1.0}[r["checking_status"]]
        s += {"no credits/all paid": -0.8, "all paid": -0.6,
              "existing paid": 0.0, "delayed previously": 0.1,
              "critical/other existing credit": 0.6}[r["credit_history"]]
        s += {"<100": -0.3, "100<=X<500": -0.1, "500<=X<1000": 0.2,
              ">=1000": 0.5, "no known savings": 0.4}[r["saving_status"]]
        s += {"unemployed": -0.2, "<1": -0.3, "1<=X<4": 0.0,
              "4<=X<7": 0.3, ">=7": 0.2}[r["employment"]]
        s += {"rent": -0.3, "own": 0.2, "for free": -0.2}[r["housing"]]
        s += {"real estate": 0.3, "life insurance": 0.0, "car": 0.0,
              "no known property": -0.4}[r["property_magnitude"]]
        s += {"none": 0.0, "co applicant": -0.3,
              "guarantor": 0.5}[r["other_parties"]]
        s += {"bank": -0.4, "stores": -0.3, "none": 0.1}[r["other_payment_plans"]]
        s += 0.1 if r["own_telephone"] == "yes" else 0.0
        return s

    scores = np.array([latent(r) + rng.logistic(0, 0.6) for r in rows])
    cut = np.quantile(scores, 0.30)
    for r, s in zip(rows, scores):
        r["class"] = "good" if s > cut else "bad"
    return rows


def credit_schema():
    def num(name, lo, hi, act="free", kind="continuous"):
        return {"name": name, "kind": kind, "lower": lo, "upper": hi,
                "actionability": act}

    def cat(name, levels, act="free", transitions=None):
        d = {"name": name, "kind": "categorical", "levels": levels,
             "actionability": act}
        if transitions is not None:
            d["allowed_transitions"] = transitions
        return d

    employment = ["unemployed", "<1", "1<=X<4", "4<=X<7", ">=7"]
    # Tenure can only grow: each level may move to itself or a longer one.
    tenure = {lvl: employment[i:] for i, lvl in enumerate(employment)}
    return {
        "label_column": "class",
        "label_levels": ["bad", "good"],
        "features": [
            num("duration", 4, 72, "non-negative"),
            num("credit_amount", 250, 18424, "non-negative"),
            num("installment_commitment", 1, 4, "non-negative"),
            num("age", 19, 75, "non-decreasing"),
            num("residence_since", 1, 4, "non-decreasing", "integer"),
            num("existing_credits", 1, 4, "non-negative", "integer"),
            num("num_dependents", 1, 2, "non-negative", "integer"),
            cat("checking_status", ["<0", "0<=X<200", ">=200", "no checking"]),
            cat("credit_history", ["no credits/all paid", "all paid",
                                   "existing paid", "delayed previously",
                                   "critical/other existing credit"]),
            cat("employment", employment, "conditional", tenure),
            cat("foreign_worker", ["yes", "no"], "immutable"),
            cat("housing", ["rent", "own", "for free"]),
            cat("job", ["unemp/unskilled non res", "unskilled resident",
                        "skilled", "high qualif/self emp/mgmt"]),
            cat("other_parties", ["none", "co applicant", "guarantor"]),
            cat("other_payment_plans", ["bank", "stores", "none"]),
            cat("own_telephone", ["none", "yes"]),
            cat("personal_status", ["male div/sep", "female div/dep/mar",
                                    "male single", "male mar/wid"],
                "immutable"),
            cat("property_magnitude", ["real estate", "life insurance", "car",
                                       "no known property"]),
            cat("purpose", ["new car", "used car", "furniture/equipment",
                            "radio/tv", "domestic appliance", "repairs",
                            "education", "retraining", "business", "other"],
                "immutable"),
            cat("saving_status", ["<100", "100<=X<500", "500<=X<1000",
                                  ">=1000", "no known savings"]),
        ],
    }


def heart_rows(rng, n=270):
    chp = ["typical angina", "atypical angina", "nonanginal pain",
           "asymptomatic"]
    ecg = ["normal", "ST-T abnormality", "left ventricular hypertrophy"]
    slope = ["upsloping", "flat", "downsloping"]
    thal = ["normal", "fixed defect", "reversible defect"]
    rows = []
    for _ in range(n):
        age = float(np.clip(rng.normal(54.4, 9.1), 29, 77))
        r = {
            "age": round(age, 2),
            "sex": pick(rng, ["female", "male"], [.32, .68]),
            "chp": pick(rng, chp, [.08, .16, .29, .47]),
            "bp": round(float(np.clip(rng.normal(131, 17.8), 94, 200)), 2),
            "sch": round(float(np.clip(rng.normal(250, 51.7), 126, 564)), 2),
            "fbs": pick(rng, ["false", "true"], [.85, .15]),
            "ecg": pick(rng, ecg, [.48, .01, .51]),
            "mhrt": round(float(np.clip(rng.normal(178 - 0.5 * age, 20),
                                        71, 202)), 2),
            "exian": pick(rng, ["no", "yes"], [.67, .33]),
            "opk": round(float(np.clip(rng.gamma(1.2, 0.9), 0, 6.2)), 2),
            "slope": pick(rng, slope, [.48, .45, .07]),
            "vessel": pick(rng, ["0", "1", "2", "3"], [.59, .21, .13, .07]),
            "thal": pick(rng, thal, [.56, .05, .39]),
        }
        rows.append(r)

    def latent(r):
        s = -0.5
        s += 0.03 * (r["age"] - 54)
        s += 0.6 if r["sex"] == "male" else -0.4
        s += {"typical angina": -0.6, "atypical angina": -0.8,
              "nonanginal pain": -0.5, "asymptomatic": 1.0}[r["chp"]]
        s += 0.012 * (r["bp"] - 131)
        s += 0.006 * (r["sch"] - 250)
        s -= 0.025 * (r["mhrt"] - 150)
        s += 0.8 if r["exian"] == "yes" else 0.0
        s += 0.5 * r["opk"]
        s += {"upsloping": -0.4, "flat": 0.4, "downsloping": 0.2}[r["slope"]]
        s += 0.7 * int(r["vessel"])
        s += {"normal": -0.6, "fixed defect": 0.4,
              "reversible defect": 0.9}[r["thal"]]
        s += 0.2 if r["ecg"] == "left ventricular hypertrophy" else 0.0
        return s

    scores = np.array([latent(r) + rng.logistic(0, 0.5) for r in rows])
    cut = np.quantile(scores, 0.56)
    for r, s in zip(rows, scores):
        r["class"] = "presence" if s > cut else "absence"
    return rows


def heart_schema():
    def num(name, lo, hi, act="free"):
        return {"name": name, "kind": "continuous", "lower": lo, "upper": hi,
                "actionability": act}

    def cat(name, levels, act="free"):
        return {"name": name, "kind": "categorical", "levels": levels,
                "actionability": act}

    return {
        "label_column": "class",
        "label_levels": ["presence", "absence"],
        "features": [
            num("age", 29, 77, "immutable"),
            cat("sex", ["female", "male"], "immutable"),
            cat("chp", ["typical angina", "atypical angina",
                        "nonanginal pain", "asymptomatic"]),
            num("bp", 94, 200, "non-negative"),
            num("sch", 126, 564, "non-negative"),
            cat("fbs", ["false", "true"]),
            cat("ecg", ["normal", "ST-T abnormality",
                        "left ventricular hypertrophy"]),
            num("mhrt", 71, 202, "non-negative"),
            cat("exian", ["no", "yes"]),
            num("opk", 0, 6.2, "non-negative"),
            cat("slope", ["upsloping", "flat", "downsloping"]),
            cat("vessel", ["0", "1", "2", "3"]),
            cat("thal", ["normal", "fixed defect", "reversible defect"]),
        ],
    }


def write(name, rows, schema):
    cols = [f["name"] for f in schema["features"]] + [schema["label_column"]]
    with open(DATA / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])
    with open(DATA / f"{name}.schema.json", "w") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")


def main():
    DATA.mkdir(exist_ok=True)
    write("german_credit", credit_rows(np.random.default_rng(20221)),
          credit_schema())
    write("heart", heart_rows(np.random.default_rng(1988)), heart_schema())


if __name__ == "__main__":
    main()
