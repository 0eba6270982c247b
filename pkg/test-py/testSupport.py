import pathlib
import xml.etree.ElementTree as ET

import numpy as np


def directoryTreeToList(path):
    path = pathlib.Path(path)
    return sorted(p.relative_to(path).as_posix() for p in path.rglob("*") if p.is_file())


def parseSVG(svgText):
    root = ET.fromstring(svgText.encode("utf-8"))
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    return root


def unitVector(angleDeg):
    radians = np.radians(angleDeg)
    return np.array([np.cos(radians), np.sin(radians)])
