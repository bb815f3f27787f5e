"""Five-bar linkage geometry: workspace, closed-form IK, and round trips.

Scans the plane for reachable targets (ASCII map), solves the inverse
kinematics for the display presets, and verifies FK(IK(target)) returns
the target to machine precision.

Run:  python demos/04_linkage_kinematics.py
"""
import math

import numpy as np

from palmpipe import (
    DisplayMap,
    LinkageGeometry,
    OutOfWorkspaceError,
    forward_kinematics,
    grid_to_contacts,
    inverse_kinematics,
)

geometry = LinkageGeometry()
print(f"links: l1={geometry.l1} l2={geometry.l2} l3={geometry.l3} "
      f"l4={geometry.l4} l5={geometry.l5} (mm)")

print("\nworkspace map (x: -20..60 mm, y: 60..2 mm top to bottom; '#' reachable):")
for y in np.linspace(60, 2, 20):
    row = ""
    for x in np.linspace(-20, 60, 54):
        try:
            inverse_kinematics(float(x), float(y), geometry)
            row += "#"
        except (OutOfWorkspaceError, ValueError):
            row += "."
    print("   " + row)

display = DisplayMap()
print("\ndisplay presets (columns x engagement depths), servo angles in degrees:")
for x in display.x_presets:
    for y in (display.y_retracted, display.y_engaged):
        a = inverse_kinematics(x, y, geometry)
        fx, fy = forward_kinematics(a, geometry)
        err = math.hypot(fx - x, fy - y)
        print(
            f"   target ({x:4.1f}, {y:4.1f}) -> tau_a {math.degrees(a.tau_a):7.2f}  "
            f"tau_e {math.degrees(a.tau_e):7.2f}   roundtrip err {err:.2e} mm"
        )

print("\na stimulus with one active cell per row drives three contacts:")
stimulus = np.zeros((3, 3))
stimulus[0, 0] = 1.0
stimulus[1, 1] = 0.5
stimulus[2, 2] = 0.25
for cmd in grid_to_contacts(stimulus, display):
    state = "engaged" if cmd.active else "retracted"
    print(
        f"   row {cmd.row}: {state} at ({cmd.x_mm:.1f}, {cmd.y_mm:.2f}) mm, "
        f"tau_a {math.degrees(cmd.angles.tau_a):.1f} deg, "
        f"tau_e {math.degrees(cmd.angles.tau_e):.1f} deg"
    )
