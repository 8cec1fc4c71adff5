"""Build the graded mesh of the cone sizing field, audit it and save an SVG."""
import sys

from dehnlab.mesh import adaptive_mesh, audit_mesh, cone_field, mesh_svg

t = int(sys.argv[1]) if len(sys.argv) > 1 else 64
h = cone_field(t)
mesh = adaptive_mesh(t, h)
rep = audit_mesh(mesh, h)
print(f"t = {t}: {len(mesh.squares)} squares, {len(mesh.triangles)} triangles")
for k, v in rep.to_dict().items():
    if k != "witnesses":
        print(f"  {k}: {v}")
with open("mesh.svg", "w") as fh:
    fh.write(mesh_svg(mesh))
print("wrote mesh.svg")
