"""Regenerate src/osmon/data/gazetteer.csv.

Country names come from pycountry (ISO 3166-1) plus the curated aliases below;
cities, institutions and exclusions are curated. Needs the `data` extra.

    python scripts/build_gazetteer.py
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import pycountry

OUT = Path(__file__).resolve().parents[1] / "src" / "osmon" / "data" / "gazetteer.csv"

COUNTRY_ALIASES = {
    "US": ["USA", "U.S.A.", "U.S.", "United States", "United States of America", "Etats-Unis",
           "Estados Unidos", "Vereinigte Staaten"],
    "GB": ["UK", "U.K.", "United Kingdom", "Great Britain", "England", "Scotland", "Wales",
           "Northern Ireland", "Royaume-Uni", "Reino Unido", "Regno Unito"],
    "FR": ["Frankreich", "Francia", "République française"],
    "DE": ["Deutschland", "Allemagne", "Alemania", "Germania"],
    "ES": ["España", "Espagne", "Spanien", "Spagna"],
    "IT": ["Italia", "Italie", "Italien"],
    "CH": ["Switzerland", "Suisse", "Schweiz", "Svizzera"],
    "BE": ["Belgique", "België", "Belgien"],
    "NL": ["The Netherlands", "Holland", "Pays-Bas", "Nederland", "Niederlande", "Países Bajos"],
    "AT": ["Österreich", "Autriche"],
    "BR": ["Brasil", "Brésil"],
    "MX": ["México", "Mexique"],
    "CN": ["P.R. China", "PR China", "P. R. China", "People's Republic of China", "Chine"],
    "JP": ["Japon"],
    "RU": ["Russia", "Russie"],
    "IN": ["Inde"],
    "MA": ["Maroc"],
    "DZ": ["Algérie"],
    "TN": ["Tunisie"],
    "CI": ["Côte d'Ivoire", "Ivory Coast"],
    "LB": ["Liban"],
    "GR": ["Grèce", "Griechenland", "Grecia", "Hellas"],
    "SE": ["Suède", "Sverige"],
    "NO": ["Norvège", "Norge"],
    "DK": ["Danemark", "Danmark"],
    "FI": ["Finlande", "Suomi"],
    "PL": ["Pologne", "Polska"],
    "IE": ["Irlande"],
    "RO": ["Roumanie", "România"],
    "HU": ["Hongrie"],
    "TR": ["Turquie", "Türkiye"],
    "EG": ["Égypte"],
    "ZA": ["Afrique du Sud"],
    "AU": ["Australie"],
    "NZ": ["Nouvelle-Zélande"],
    "CM": ["Cameroun"],
    "IS": ["Islande"],
    "TH": ["Thaïlande"],
    "ID": ["Indonésie"],
    "AR": ["Argentine"],
    "CL": ["Chili"],
    "CO": ["Colombie"],
    "PE": ["Pérou"],
    "KR": ["South Korea", "Republic of Korea", "Korea", "Corée du Sud"],
    "KP": ["North Korea", "DPRK"],
    "CD": ["Democratic Republic of the Congo", "DR Congo", "DRC"],
    "CG": ["Republic of the Congo"],
    "CZ": ["Czech Republic"],
    "AE": ["UAE", "U.A.E."],
    "MK": ["Macedonia"],
    "VN": ["Viet Nam"],
    "IR": ["Iran"],
    "SY": ["Syria"],
    "TW": ["Taiwan"],
    "BO": ["Bolivia"],
    "VE": ["Venezuela"],
    "TZ": ["Tanzania"],
    "MD": ["Moldova"],
    "LA": ["Laos"],
    "FM": ["Micronesia"],
    "PS": ["Palestine"],
    "VG": ["British Virgin Islands"],
    "VI": ["US Virgin Islands"],
}

# (alias, {country: weight}); ambiguous names carry weights < 1
CITIES = {
    "Paris": {"FR": 0.9, "US": 0.1},
    "Lyon": {"FR": 1.0},
    "Marseille": {"FR": 1.0},
    "Toulouse": {"FR": 1.0},
    "Bordeaux": {"FR": 1.0},
    "Lille": {"FR": 1.0},
    "Nantes": {"FR": 1.0},
    "Strasbourg": {"FR": 1.0},
    "Montpellier": {"FR": 1.0},
    "Grenoble": {"FR": 1.0},
    "Rennes": {"FR": 1.0},
    "Nice": {"FR": 1.0},
    "Orsay": {"FR": 1.0},
    "Gif-sur-Yvette": {"FR": 1.0},
    "Palaiseau": {"FR": 1.0},
    "Villeurbanne": {"FR": 1.0},
    "Caen": {"FR": 1.0},
    "Rouen": {"FR": 1.0},
    "Dijon": {"FR": 1.0},
    "Clermont-Ferrand": {"FR": 1.0},
    "Brest": {"FR": 0.8, "BY": 0.2},
    "Nancy": {"FR": 1.0},
    "Metz": {"FR": 1.0},
    "Poitiers": {"FR": 1.0},
    "Tours": {"FR": 1.0},
    "Angers": {"FR": 1.0},
    "Reims": {"FR": 1.0},
    "Amiens": {"FR": 1.0},
    "Besançon": {"FR": 1.0},
    "Limoges": {"FR": 1.0},
    "Versailles": {"FR": 1.0},
    "Orléans": {"FR": 1.0},
    "Villejuif": {"FR": 1.0},
    "Créteil": {"FR": 1.0},
    "Saclay": {"FR": 1.0},
    "Berlin": {"DE": 1.0},
    "Munich": {"DE": 1.0},
    "München": {"DE": 1.0},
    "Hamburg": {"DE": 1.0},
    "Heidelberg": {"DE": 1.0},
    "Frankfurt": {"DE": 1.0},
    "Cologne": {"DE": 1.0},
    "Göttingen": {"DE": 1.0},
    "Bonn": {"DE": 1.0},
    "Madrid": {"ES": 1.0},
    "Barcelona": {"ES": 0.95, "VE": 0.05},
    "Valencia": {"ES": 0.9, "VE": 0.1},
    "Seville": {"ES": 1.0},
    "Rome": {"IT": 0.95, "US": 0.05},
    "Roma": {"IT": 1.0},
    "Milan": {"IT": 1.0},
    "Milano": {"IT": 1.0},
    "Turin": {"IT": 1.0},
    "Bologna": {"IT": 1.0},
    "Naples": {"IT": 0.8, "US": 0.2},
    "London": {"GB": 0.9, "CA": 0.1},
    "Oxford": {"GB": 0.9, "US": 0.1},
    "Cambridge": {"GB": 0.6, "US": 0.4},
    "Manchester": {"GB": 0.9, "US": 0.1},
    "Edinburgh": {"GB": 1.0},
    "Glasgow": {"GB": 1.0},
    "Birmingham": {"GB": 0.7, "US": 0.3},
    "Dublin": {"IE": 0.9, "US": 0.1},
    "Cork": {"IE": 1.0},
    "Amsterdam": {"NL": 1.0},
    "Utrecht": {"NL": 1.0},
    "Leiden": {"NL": 1.0},
    "Rotterdam": {"NL": 1.0},
    "Brussels": {"BE": 1.0},
    "Bruxelles": {"BE": 1.0},
    "Leuven": {"BE": 1.0},
    "Louvain-la-Neuve": {"BE": 1.0},
    "Ghent": {"BE": 1.0},
    "Liège": {"BE": 1.0},
    "Geneva": {"CH": 1.0},
    "Genève": {"CH": 1.0},
    "Lausanne": {"CH": 1.0},
    "Zurich": {"CH": 1.0},
    "Basel": {"CH": 1.0},
    "Bern": {"CH": 1.0},
    "Vienna": {"AT": 0.9, "US": 0.1},
    "Wien": {"AT": 1.0},
    "Stockholm": {"SE": 1.0},
    "Uppsala": {"SE": 1.0},
    "Oslo": {"NO": 1.0},
    "Copenhagen": {"DK": 1.0},
    "Helsinki": {"FI": 1.0},
    "Warsaw": {"PL": 1.0},
    "Krakow": {"PL": 1.0},
    "Prague": {"CZ": 1.0},
    "Lisbon": {"PT": 1.0},
    "Porto": {"PT": 1.0},
    "Athens": {"GR": 0.8, "US": 0.2},
    "Luxembourg": {"LU": 1.0},
    "Boston": {"US": 0.95, "GB": 0.05},
    "New York": {"US": 1.0},
    "Chicago": {"US": 1.0},
    "Los Angeles": {"US": 1.0},
    "San Francisco": {"US": 1.0},
    "Seattle": {"US": 1.0},
    "Atlanta": {"US": 1.0},
    "Houston": {"US": 1.0},
    "Baltimore": {"US": 1.0},
    "Pittsburgh": {"US": 1.0},
    "Philadelphia": {"US": 1.0},
    "Berkeley": {"US": 1.0},
    "Stanford": {"US": 1.0},
    "Bethesda": {"US": 1.0},
    "Ann Arbor": {"US": 1.0},
    "New Orleans": {"US": 1.0},
    "New Jersey": {"US": 1.0},
    "New Mexico": {"US": 1.0},
    "Washington": {"US": 1.0},
    "Toronto": {"CA": 1.0},
    "Montreal": {"CA": 1.0},
    "Montréal": {"CA": 1.0},
    "Vancouver": {"CA": 0.9, "US": 0.1},
    "Quebec": {"CA": 1.0},
    "Ottawa": {"CA": 1.0},
    "Beijing": {"CN": 1.0},
    "Shanghai": {"CN": 1.0},
    "Wuhan": {"CN": 1.0},
    "Guangzhou": {"CN": 1.0},
    "Hangzhou": {"CN": 1.0},
    "Nanjing": {"CN": 1.0},
    "Tokyo": {"JP": 1.0},
    "Kyoto": {"JP": 1.0},
    "Osaka": {"JP": 1.0},
    "Seoul": {"KR": 1.0},
    "Daejeon": {"KR": 1.0},
    "Taipei": {"TW": 1.0},
    "Bangalore": {"IN": 1.0},
    "Mumbai": {"IN": 1.0},
    "New Delhi": {"IN": 1.0},
    "Sydney": {"AU": 0.9, "CA": 0.1},
    "Melbourne": {"AU": 0.9, "US": 0.1},
    "Brisbane": {"AU": 1.0},
    "New South Wales": {"AU": 1.0},
    "Auckland": {"NZ": 1.0},
    "São Paulo": {"BR": 1.0},
    "Rio de Janeiro": {"BR": 1.0},
    "Buenos Aires": {"AR": 1.0},
    "Santiago": {"CL": 0.8, "ES": 0.1, "DO": 0.1},
    "Bogotá": {"CO": 1.0},
    "Mexico City": {"MX": 1.0},
    "Lima": {"PE": 0.9, "US": 0.1},
    "Dakar": {"SN": 1.0},
    "Abidjan": {"CI": 1.0},
    "Rabat": {"MA": 1.0},
    "Casablanca": {"MA": 1.0},
    "Tunis": {"TN": 1.0},
    "Algiers": {"DZ": 1.0},
    "Cairo": {"EG": 1.0},
    "Nairobi": {"KE": 1.0},
    "Lagos": {"NG": 0.9, "PT": 0.1},
    "Niamey": {"NE": 1.0},
    "Abuja": {"NG": 1.0},
    "Cape Town": {"ZA": 1.0},
    "Johannesburg": {"ZA": 1.0},
    "Yaoundé": {"CM": 1.0},
    "Antananarivo": {"MG": 1.0},
    "Jerusalem": {"IL": 1.0},
    "Tel Aviv": {"IL": 1.0},
    "Haifa": {"IL": 1.0},
    "Beirut": {"LB": 1.0},
    "Tehran": {"IR": 1.0},
    "Istanbul": {"TR": 1.0},
    "Ankara": {"TR": 1.0},
    "Moscow": {"RU": 0.95, "US": 0.05},
    "Saint Petersburg": {"RU": 0.9, "US": 0.1},
    "Singapore": {"SG": 1.0},
    "Hanoi": {"VN": 1.0},
    "Bangkok": {"TH": 1.0},
    "Jakarta": {"ID": 1.0},
}

INSTITUTIONS = {
    "FR": ["CNRS", "INSERM", "INRAE", "INRA", "INRIA", "CEA", "IRD", "CIRAD", "Institut Pasteur",
           "Sorbonne Université", "Université Paris-Saclay", "Université Paris Cité", "École Polytechnique",
           "ENS", "Ecole Normale Supérieure", "AP-HP", "Assistance Publique Hôpitaux de Paris", "CHU",
           "Institut Curie", "IFREMER", "BRGM", "INED", "EHESS", "Collège de France", "Université de Lyon",
           "Université de Bordeaux", "Aix-Marseille Université", "Université Grenoble Alpes",
           "Université de Strasbourg", "Université de Montpellier", "Université de Lille", "CNES",
           "Institut Polytechnique de Paris", "Gustave Roussy"],
    "DE": ["Max Planck", "Max-Planck-Institut", "Helmholtz", "Fraunhofer", "DKFZ", "Leibniz",
           "Charité", "Forschungszentrum Jülich", "LMU", "Ludwig-Maximilians-Universität",
           "Technische Universität München", "TUM", "DESY", "EMBL"],
    "ES": ["CSIC", "Universidad Complutense", "Universitat de Barcelona", "CNIO"],
    "IT": ["CNR", "INFN", "Sapienza", "Politecnico di Milano", "Università di Bologna"],
    "CH": ["ETH Zurich", "ETH Zürich", "EPFL", "CERN", "Paul Scherrer Institut"],
    "GB": ["UCL", "University College London", "Imperial College", "University of Oxford",
           "University of Cambridge", "King's College London", "Wellcome Sanger", "LSHTM",
           "University of Edinburgh", "Francis Crick Institute"],
    "US": ["MIT", "Massachusetts Institute of Technology", "Harvard", "Harvard University",
           "Stanford University", "NIH", "National Institutes of Health", "Caltech", "NASA",
           "Johns Hopkins", "Yale University", "Princeton University", "Columbia University",
           "University of California", "UCLA", "UCSF", "Mayo Clinic", "Broad Institute",
           "Georgia Institute of Technology", "Georgia Tech", "University of Georgia"],
    "NL": ["KNAW", "Universiteit van Amsterdam", "TU Delft", "Radboud"],
    "BE": ["KU Leuven", "UCLouvain", "Université libre de Bruxelles", "VIB"],
    "CA": ["McGill", "University of Toronto", "CNRC", "Université de Montréal", "Université Laval"],
    "CN": ["Chinese Academy of Sciences", "Tsinghua University", "Peking University", "Fudan University",
           "Zhejiang University"],
    "JP": ["RIKEN", "University of Tokyo", "Kyoto University", "Osaka University"],
    "KR": ["KAIST", "Seoul National University"],
    "SE": ["Karolinska", "Karolinska Institutet"],
    "IL": ["Weizmann", "Technion"],
    "AU": ["CSIRO", "University of Melbourne", "University of Sydney"],
    "BR": ["Fiocruz", "Universidade de São Paulo", "USP"],
    "SN": ["Université Cheikh Anta Diop", "UCAD"],
    "DK": ["DTU", "Technical University of Denmark"],
}

# pattern -> country it vetoes
EXCLUSIONS = [
    ("Georgia Institute of Technology", "GE"),
    ("Georgia Tech", "GE"),
    ("University of Georgia", "GE"),
    ("Georgia State University", "GE"),
    ("Atlanta", "GE"),
    ("Athens, GA", "GE"),
    ("Paris, TX", "FR"),
    ("Paris, Texas", "FR"),
    ("Paris, ID", "FR"),
    ("Paris, TN", "FR"),
    ("Lima, OH", "PE"),
    ("Athens, OH", "GR"),
    ("Athens, GA", "GR"),
    ("Moscow, ID", "RU"),
    ("Cambridge, MA", "GB"),
    ("London, ON", "GB"),
    ("London, Ontario", "GB"),
    ("Jersey City", "JE"),
    ("Niger Delta", "NE"),
    ("Niger State", "NE"),
]


def country_rows() -> list[tuple[str, str, str, str]]:
    rows = set()
    for c in pycountry.countries:
        names = {getattr(c, "common_name", None), getattr(c, "official_name", None), c.name}
        for name in names:
            if name and "," not in name:
                rows.add(("country", name, c.alpha_2, ""))
    for code, aliases in COUNTRY_ALIASES.items():
        for alias in aliases:
            rows.add(("country", alias, code, ""))
    return sorted(rows)


def main() -> int:
    rows = country_rows()
    for alias, countries in CITIES.items():
        for code, weight in sorted(countries.items()):
            rows.append(("city", alias, code, f"{weight:g}"))
    for code, names in INSTITUTIONS.items():
        for name in names:
            rows.append(("institution", name, code, ""))
    for pattern, code in EXCLUSIONS:
        rows.append(("exclusion", pattern, code, ""))
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "alias", "country", "weight"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {OUT}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
