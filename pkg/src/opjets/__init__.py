"""opjets: exact-arithmetic engine for operads, operadic algebras and
modules, connections, Atiyah classes, curvature forms, and Maurer-Cartan
deformation flows over bounded rational cochain complexes."""

__version__ = "0.1.0"
