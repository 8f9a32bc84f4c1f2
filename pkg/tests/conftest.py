import pytest

# --------------------------------------------------------------------------
# Survey-style fixture: 6 paper stubs x 4 topic clusters.
# Hand-tagged incidence (title/abstract/keywords):
#   P1: KD LT | P2: KD IR | P3: LT | P4: KD PA | P5: IR PA | P6: -
# P3 is the specificity case: it talks about "attribute exploration", which
# must NOT trigger the knowledge-discovery cluster's "data exploration".
# --------------------------------------------------------------------------

SURVEY_CORPUS_XML = b"""<?xml version="1.0" encoding="utf-8"?>
<corpus language="en">
  <document id="P1" timestamp="2005-04-01T09:00:00Z" url="papers/P1.pdf">
    <title>Applying data mining to text corpora</title>
    <authors>A. One; B. Two</authors>
    <abstract>We describe a data mining approach built on a concept lattice
    of observational reports.</abstract>
    <keywords>data mining; concept lattice</keywords>
    <body>Long full text that also mentions fuzzy methods.</body>
  </document>
  <document id="P2" timestamp="2006-05-01T09:00:00Z" url="papers/P2.pdf">
    <title>Knowledge discovery in databases</title>
    <authors>C. Three</authors>
    <abstract>A survey of KDD and information retrieval methods.</abstract>
    <keywords>KDD; information retrieval</keywords>
    <body>Full text.</body>
  </document>
  <document id="P3" timestamp="2007-06-01T09:00:00Z" url="papers/P3.pdf">
    <title>Attribute exploration in practice</title>
    <authors>D. Four</authors>
    <abstract>Attribute exploration constructs a formal context
    interactively.</abstract>
    <keywords>formal context</keywords>
    <body>Full text.</body>
  </document>
  <document id="P4" timestamp="2008-07-01T09:00:00Z" url="papers/P4.pdf">
    <title>Interactive data exploration</title>
    <authors>E. Five</authors>
    <abstract>Data exploration guided by process discovery of event
    logs.</abstract>
    <keywords>process discovery</keywords>
    <body>Full text.</body>
  </document>
  <document id="P5" timestamp="2009-08-01T09:00:00Z" url="papers/P5.pdf">
    <title>Scaling the inverted index</title>
    <authors>F. Six</authors>
    <abstract>We compress the inverted index and replay each event
    sequence.</abstract>
    <keywords>inverted index; event sequence</keywords>
    <body>Full text.</body>
  </document>
  <document id="P6" timestamp="2010-09-01T09:00:00Z" url="papers/P6.pdf">
    <title>A note on sorting networks</title>
    <authors>G. Seven</authors>
    <abstract>Sorting networks considered delightful.</abstract>
    <keywords>sorting</keywords>
    <body>Full text.</body>
  </document>
</corpus>
"""

SURVEY_ONTOLOGY_XML = b"""<?xml version="1.0" encoding="utf-8"?>
<ontology>
  <cluster name="Knowledge discovery">
    <term>data mining</term>
    <term>KDD</term>
    <term>data exploration</term>
  </cluster>
  <cluster name="Information retrieval">
    <term>information retrieval</term>
    <term>inverted index</term>
  </cluster>
  <cluster name="Lattice theory">
    <term>concept lattice</term>
    <term>formal context</term>
    <term>Galois connection</term>
  </cluster>
  <cluster name="Process analysis">
    <term>process discovery</term>
    <term>event sequence</term>
  </cluster>
  <attribute kind="textmining" name="KD">
    <clusterRef name="Knowledge discovery"/>
    <sections>title abstract keywords</sections>
  </attribute>
  <attribute kind="textmining" name="IR">
    <clusterRef name="Information retrieval"/>
    <sections>title abstract keywords</sections>
  </attribute>
  <attribute kind="textmining" name="LT">
    <clusterRef name="Lattice theory"/>
    <sections>title abstract keywords</sections>
  </attribute>
  <attribute kind="textmining" name="PA">
    <clusterRef name="Process analysis"/>
    <sections>title abstract keywords</sections>
  </attribute>
  <attribute kind="temporal" name="early">
    <window from="2005-01-01T00:00:00Z" to="2008-01-01T00:00:00Z"/>
  </attribute>
  <objectCluster name="byYear" key="time:year"/>
</ontology>
"""

# hand-tagged 6x4 incidence over (KD, IR, LT, PA)
SURVEY_INCIDENCE = {
    "P1": {"KD", "LT"},
    "P2": {"KD", "IR"},
    "P3": {"LT"},
    "P4": {"KD", "PA"},
    "P5": {"IR", "PA"},
    "P6": set(),
}

# --------------------------------------------------------------------------
# Police-style fixture: per-person report streams over 2005-2009, with one
# same-day pair (R6, R6b) for granule tie-breaking and one document without
# a person key (R8).
# --------------------------------------------------------------------------

POLICE_CORPUS_XML = b"""<?xml version="1.0" encoding="utf-8"?>
<corpus language="en">
  <document id="R1" timestamp="2005-03-01T10:00:00Z" url="reports/R1">
    <title>Routine inspection</title>
    <body>Routine inspection, nothing found.</body>
    <field name="person">P1</field>
  </document>
  <document id="R2" timestamp="2006-05-10T11:00:00Z" url="reports/R2">
    <title>Market incident</title>
    <body>Report of assault at the market.</body>
    <field name="person">P1</field>
  </document>
  <document id="R3" timestamp="2007-07-15T12:00:00Z" url="reports/R3">
    <title>Escalation</title>
    <body>Assault with a knife.</body>
    <field name="person">P1</field>
  </document>
  <document id="R4" timestamp="2008-01-20T13:00:00Z" url="reports/R4">
    <title>Serious incident</title>
    <body>Victim of assault threatened with a weapon; cocaine found.</body>
    <field name="person">P1</field>
  </document>
  <document id="R5" timestamp="2006-02-02T08:00:00Z" url="reports/R5">
    <title>Vehicle check</title>
    <body>Drugs found in vehicle; cocaine.</body>
    <field name="person">P2</field>
  </document>
  <document id="R6" timestamp="2007-08-08T09:00:00Z" url="reports/R6">
    <title>Morning patrol</title>
    <body>Knife confiscated.</body>
    <field name="person">P2</field>
  </document>
  <document id="R6b" timestamp="2007-08-08T14:00:00Z" url="reports/R6b">
    <title>Afternoon patrol</title>
    <body>Weapon seized during assault.</body>
    <field name="person">P2</field>
  </document>
  <document id="R7" timestamp="2009-09-09T23:30:00Z" url="reports/R7">
    <title>Night incident</title>
    <body>Assault reported late at night.</body>
    <field name="person">P2</field>
  </document>
  <document id="R8" timestamp="2009-10-10T12:00:00Z" url="reports/R8">
    <title>Observation</title>
    <body>General observation.</body>
  </document>
</corpus>
"""

POLICE_ONTOLOGY_XML = b"""<?xml version="1.0" encoding="utf-8"?>
<ontology>
  <cluster name="violence">
    <term>violence</term>
    <term>assault</term>
  </cluster>
  <cluster name="weapons">
    <term>weapon</term>
    <term>knife</term>
  </cluster>
  <cluster name="narcotics">
    <term>drugs</term>
    <term>cocaine</term>
  </cluster>
  <attribute kind="textmining" name="violent">
    <clusterRef name="violence"/>
    <sections>body</sections>
  </attribute>
  <attribute kind="textmining" name="armed">
    <clusterRef name="weapons"/>
    <sections>body</sections>
  </attribute>
  <attribute kind="textmining" name="drugs">
    <clusterRef name="narcotics"/>
    <sections>body</sections>
  </attribute>
  <attribute kind="temporal" name="early_era">
    <window from="2005-01-01T00:00:00Z" to="2008-01-01T00:00:00Z"/>
  </attribute>
  <attribute kind="temporal" name="night">
    <periodic hours="22-6"/>
  </attribute>
  <attribute kind="compound" name="violent_armed">
    <and><ref name="violent"/><ref name="armed"/></and>
  </attribute>
  <attribute kind="compound" name="risky">
    <or><ref name="violent_armed"/><ref name="drugs"/></or>
  </attribute>
  <objectCluster name="byPerson" key="field:person" missing="skip"/>
  <objectCluster name="byPersonStrict" key="field:person" missing="error"/>
  <objectCluster name="byPersonOwn" key="field:person" missing="own-group"/>
  <objectCluster name="byDay" key="time:day"/>
  <segmentation name="years">
    <interval from="2005-01-01T00:00:00Z" to="2006-01-01T00:00:00Z"/>
    <interval from="2006-01-01T00:00:00Z" to="2007-01-01T00:00:00Z"/>
    <interval from="2007-01-01T00:00:00Z" to="2008-01-01T00:00:00Z"/>
    <interval from="2008-01-01T00:00:00Z" to="2009-01-01T00:00:00Z"/>
    <interval from="2009-01-01T00:00:00Z" to="2010-01-01T00:00:00Z"/>
  </segmentation>
  <segmentation name="violent_split">
    <predicate><ref name="violent"/></predicate>
  </segmentation>
</ontology>
"""

# --------------------------------------------------------------------------
# Clinical-style fixture: activity events per patient, one activity code per
# document in a structured field.
# --------------------------------------------------------------------------

CLINICAL_CORPUS_XML = b"""<?xml version="1.0" encoding="utf-8"?>
<corpus language="en">
  <document id="A1" timestamp="2008-02-01T08:00:00Z" url="events/A1">
    <body>Patient admitted.</body>
    <field name="patient">A</field>
    <field name="activity">admit</field>
  </document>
  <document id="A2" timestamp="2008-02-01T09:00:00Z" url="events/A2">
    <body>Preparation for surgery.</body>
    <field name="patient">A</field>
    <field name="activity">prep</field>
  </document>
  <document id="A3" timestamp="2008-02-01T10:00:00Z" url="events/A3">
    <body>Surgery performed.</body>
    <field name="patient">A</field>
    <field name="activity">surgery</field>
  </document>
  <document id="B1" timestamp="2008-02-02T08:00:00Z" url="events/B1">
    <body>Patient admitted.</body>
    <field name="patient">B</field>
    <field name="activity">admit</field>
  </document>
  <document id="B2" timestamp="2008-02-02T09:00:00Z" url="events/B2">
    <body>Preparation for surgery.</body>
    <field name="patient">B</field>
    <field name="activity">prep</field>
  </document>
  <document id="B3" timestamp="2008-02-02T10:00:00Z" url="events/B3">
    <body>Surgery performed.</body>
    <field name="patient">B</field>
    <field name="activity">surgery</field>
  </document>
</corpus>
"""

CLINICAL_ONTOLOGY_XML = b"""<?xml version="1.0" encoding="utf-8"?>
<ontology>
  <cluster name="surgery">
    <term>surgery</term>
  </cluster>
  <attribute kind="textmining" name="surgical">
    <clusterRef name="surgery"/>
    <sections>body</sections>
  </attribute>
  <objectCluster name="byPatient" key="field:patient"/>
</ontology>
"""


@pytest.fixture
def survey_corpus():
    from conceptbench.corpus import load_documents
    return load_documents(SURVEY_CORPUS_XML)


@pytest.fixture
def survey_ontology():
    from conceptbench.ontology import parse_ontology
    return parse_ontology(SURVEY_ONTOLOGY_XML)


@pytest.fixture
def survey_index(survey_corpus):
    from conceptbench.corpus import build_index
    return build_index(survey_corpus, {"title", "abstract", "keywords"})


@pytest.fixture
def survey_context(survey_corpus, survey_ontology, survey_index):
    from conceptbench.context import build_context
    attrs = [survey_ontology.attribute(a) for a in ("KD", "IR", "LT", "PA")]
    return build_context(survey_corpus, attrs, survey_index)


@pytest.fixture
def police_corpus():
    from conceptbench.corpus import load_documents
    return load_documents(POLICE_CORPUS_XML)


@pytest.fixture
def police_ontology():
    from conceptbench.ontology import parse_ontology
    return parse_ontology(POLICE_ONTOLOGY_XML)


@pytest.fixture
def police_index(police_corpus):
    from conceptbench.corpus import build_index
    return build_index(police_corpus, {"title", "body"})


@pytest.fixture
def clinical_corpus():
    from conceptbench.corpus import load_documents
    return load_documents(CLINICAL_CORPUS_XML)


def make_context(rows_by_object, attributes):
    """Small helper: build a FormalContext from {object: set(attr)}."""
    from conceptbench.context import ContextObject, FormalContext

    objects = tuple(ContextObject(obj, obj, f"obj://{obj}")
                    for obj in rows_by_object)
    attr_index = {name: i for i, name in enumerate(attributes)}
    rows = []
    for obj, members in rows_by_object.items():
        row = 0
        for name in members:
            row |= 1 << attr_index[name]
        rows.append(row)
    return FormalContext(objects=objects, attributes=tuple(attributes),
                         rows=tuple(rows))
