"""Bundled example data.

``HOSPITAL`` holds survival times of patients from four hospitals (raw
observations).  ``BLOOD`` holds summary statistics of five measurements
taken on abnormal blood samples in two survey years, kept as the strings
printed in the source table so that the CSV fixtures are byte-stable.
"""

from .model import Dataset

HOSPITAL = {
    "1": (176, 105, 266, 227, 66),
    "2": (24, 5, 155, 54),
    "3": (58, 64, 15),
    "4": (174, 42, 305, 92, 30, 82, 265, 237, 208, 147),
}

# measurement -> rows of (year, n, mean, sd)
BLOOD = {
    "rbc": (("1995", "65", "4.606", "0.0954"), ("1996", "73", "4.574", "0.0838")),
    "mcv": (("1995", "63", "87.25", "3.496"), ("1996", "72", "92.33", "3.078")),
    "hct": (("1995", "64", "0.4024", "0.0194"), ("1996", "72", "0.4216", "0.0168")),
    "wbc": (("1995", "65", "17.68", "1.067"), ("1996", "73", "18.93", "1.211")),
    "plt": (("1995", "64", "524.7", "37.05"), ("1996", "71", "466.5", "41.58")),
}


def hospital():
    return Dataset.from_groups(list(HOSPITAL.values()))


def blood(measurement):
    rows = BLOOD[measurement.lower()]
    return Dataset.from_summaries([int(r[1]) for r in rows], [float(r[2]) for r in rows],
                                  [float(r[3]) for r in rows])


def hospital_csv():
    lines = ["group,value"]
    for g, values in HOSPITAL.items():
        lines += [f"{g},{v}" for v in values]
    return "\n".join(lines) + "\n"


def blood_csv(measurement):
    lines = ["group,n,mean,sd"] + [",".join(r) for r in BLOOD[measurement.lower()]]
    return "\n".join(lines) + "\n"
