from glocal.models.tp import (
    TypeProblem,
    TypeGeometry,
    TypeVariant,
    TypeRelaxation,
    TypeSchedule,
    TypeSuite,
    TypeAlteration,
)
from glocal.models.result import *
from glocal.models.trace import *
from glocal.models.summary import RunSummary
from glocal.models.certificate import CertificateReport
