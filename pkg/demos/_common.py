from premlog import Interpretation, Relation


def arc_edb(arcs):
    edb = Interpretation()
    edb["arc"] = Relation("arc", 3, arcs)
    return edb
