"""Checkpoint files: text shape manifest followed by raw float64 payload.

Layout:

    palmpipe-ckpt v1
    arch <in_channels> <grid> <c1> <c2> <w1> <w2> <w3> <n_angle> <n_position>
    <name> <dim> <dim> ...        (one line per array, canonical order)
    .
    <raw little-endian float64 values, manifest order>

The round trip is bit-exact; truncated or mismatched files are rejected
with a message naming the problem.
"""
from __future__ import annotations

import numpy as np

from .model import ArchConfig, BatchNormState, ModelParams, init_model

CKPT_MAGIC = "palmpipe-ckpt v1"
_END_OF_MANIFEST = "."


class CheckpointError(ValueError):
    """Corrupt, truncated, or shape-mismatched checkpoint file."""


def save_checkpoint(params: ModelParams, path) -> None:
    arch = params.arch
    names_arrays = list(params.named_arrays())
    manifest = [CKPT_MAGIC]
    manifest.append(
        "arch "
        + " ".join(
            str(v)
            for v in (
                arch.in_channels, arch.grid, *arch.conv_channels,
                *arch.head_widths, arch.n_angle, arch.n_position,
            )
        )
    )
    for name, arr in names_arrays:
        manifest.append(f"{name} " + " ".join(str(d) for d in arr.shape))
    manifest.append(_END_OF_MANIFEST)
    with open(path, "wb") as fh:
        fh.write(("\n".join(manifest) + "\n").encode("ascii"))
        for _, arr in names_arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path, expect_arch: ArchConfig | None = None) -> ModelParams:
    """Rebuild a model from a checkpoint.

    When ``expect_arch`` is given, every stored shape is validated against
    it and a mismatch names the offending layer.
    """
    with open(path, "rb") as fh:
        magic = fh.readline().decode("ascii", errors="replace").rstrip("\n")
        if magic != CKPT_MAGIC:
            raise CheckpointError(f"bad magic line {magic!r}")
        arch_line = fh.readline().decode("ascii", errors="replace").split()
        if len(arch_line) != 10 or arch_line[0] != "arch":
            raise CheckpointError("missing or malformed arch line")
        vals = [int(v) for v in arch_line[1:]]
        arch = ArchConfig(
            in_channels=vals[0],
            grid=vals[1],
            conv_channels=(vals[2], vals[3]),
            head_widths=(vals[4], vals[5], vals[6]),
            n_angle=vals[7],
            n_position=vals[8],
        )
        manifest: list[tuple[str, tuple[int, ...]]] = []
        while True:
            line = fh.readline().decode("ascii", errors="replace").rstrip("\n")
            if line == "":
                raise CheckpointError("manifest ended before terminator")
            if line == _END_OF_MANIFEST:
                break
            parts = line.split()
            manifest.append((parts[0], tuple(int(d) for d in parts[1:])))

        reference = init_model(arch, seed=0)
        expected_shapes = {name: arr.shape for name, arr in reference.named_arrays()}
        if [name for name, _ in manifest] != list(expected_shapes):
            raise CheckpointError("manifest layer names do not match the architecture")
        for name, shape in manifest:
            if shape != expected_shapes[name]:
                raise CheckpointError(
                    f"layer {name}: stored shape {shape} does not match "
                    f"architecture shape {expected_shapes[name]}"
                )
        if expect_arch is not None:
            wanted = init_model(expect_arch, seed=0)
            for (name, shape), (_, want_arr) in zip(manifest, wanted.named_arrays()):
                if shape != want_arr.shape:
                    raise CheckpointError(
                        f"layer {name}: checkpoint shape {shape} does not match "
                        f"expected shape {want_arr.shape}"
                    )

        loaded: dict[str, np.ndarray] = {}
        for name, shape in manifest:
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise CheckpointError(
                    f"truncated payload in layer {name}: wanted {count * 8} bytes, "
                    f"got {len(raw)}"
                )
            loaded[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        if fh.read(1):
            raise CheckpointError("trailing bytes after the declared payload")

    def bn(prefix: str) -> BatchNormState:
        return BatchNormState(
            gamma=loaded[f"{prefix}.gamma"],
            beta=loaded[f"{prefix}.beta"],
            run_mean=loaded[f"{prefix}.run_mean"],
            run_var=loaded[f"{prefix}.run_var"],
        )

    def head(prefix: str, n_layers: int):
        return [(loaded[f"{prefix}.{i}.w"], loaded[f"{prefix}.{i}.b"]) for i in range(n_layers)]

    n_head_layers = len(arch.head_dims(arch.n_angle))
    return ModelParams(
        arch=arch,
        conv1_w=loaded["conv1.w"],
        conv1_b=loaded["conv1.b"],
        bn1=bn("bn1"),
        conv2_w=loaded["conv2.w"],
        conv2_b=loaded["conv2.b"],
        bn2=bn("bn2"),
        angle_head=head("angle", n_head_layers),
        pos_head=head("pos", n_head_layers),
    )
