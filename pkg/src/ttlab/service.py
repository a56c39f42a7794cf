"""FastAPI service exposing the triple-tree toolkit.

Request and response schemas are pydantic models; the handler functions
are plain callables so the command-line client can invoke them in-process
with identical semantics.  Long-running extended enumeration is rejected
over HTTP (use the CLI locally).
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import FORMAT_VERSION
from .certificates import find_tree_avoiding_lc, morse_from_lc
from .complexes import (
    DegenerateSize,
    MembershipFailed,
    Triangulation3D,
    triangulation_to_triple,
    triple_to_triangulation,
    verify_membership,
)
from .enumeration import (
    DEFAULT_CAP,
    EnumerationCapExceeded,
    apollonian_growth_constant,
    apollonian_series,
    bounds_report,
    catalog,
    enumerate_Mn,
    h_series,
    hierarchical_count,
)
from .planar import TripleRejected, TripleTree
from .sampler import ChainConfig, restart_pool, run_chain, z_star_estimate

SERVICE_STEP_CAP = 2_000_000


class EnumerateRequest(BaseModel):
    n: int = Field(ge=2)
    extended: bool = False


class Coefficient(BaseModel):
    x_power: int
    count: int


class EnumerateResponse(BaseModel):
    format: str = FORMAT_VERSION
    n: int
    coefficients: list[Coefficient]
    total: int
    maps_scanned: int
    seconds: float


class SeriesRequest(BaseModel):
    family: str = Field(pattern="^[HAM]$")
    order: int = Field(ge=1, le=64)


class SeriesResponse(BaseModel):
    format: str = FORMAT_VERSION
    family: str
    coefficients: list[int] | list[dict]
    growth_constant: Optional[float] = None


class VerifyRequest(BaseModel):
    triangulation: dict


class VerifyResponse(BaseModel):
    format: str = FORMAT_VERSION
    ok: bool
    diagnostics: list[str]


class Build3DRequest(BaseModel):
    triple: dict


class Build3DResponse(BaseModel):
    format: str = FORMAT_VERSION
    triangulation: dict


class CertifyRequest(BaseModel):
    triangulation: dict


class CertifyResponse(BaseModel):
    format: str = FORMAT_VERSION
    certificate: dict
    gradient: dict
    triple: dict


class SampleRequest(BaseModel):
    x: float = Field(gt=0)
    n_min: int = Field(ge=2)
    n_max: int
    steps: int = Field(ge=1, le=SERVICE_STEP_CAP)
    seed: int = 0
    calibrated: bool = True
    thinning: Optional[int] = None
    restart_every: Optional[int] = None


class SampleResponse(BaseModel):
    format: str = FORMAT_VERSION
    histogram: list[dict]
    f_weights: dict[int, float]
    ratios: dict[int, float]
    z_star: Optional[float]
    z_star_error: Optional[float]
    coverage: dict[int, int]
    move_stats: dict[str, dict[str, int]]


class CatalogRequest(BaseModel):
    n: int = Field(ge=2)


class CatalogResponse(BaseModel):
    format: str = FORMAT_VERSION
    n: int
    entries: list[dict]
    loop_counts: dict[int, int]


def do_enumerate(req: EnumerateRequest) -> EnumerateResponse:
    report = enumerate_Mn(req.n, extended=req.extended)
    return EnumerateResponse(
        n=req.n,
        coefficients=[
            Coefficient(x_power=k, count=v)
            for k, v in sorted(report.coefficients.items())
        ],
        total=report.total(),
        maps_scanned=report.maps_scanned,
        seconds=round(report.seconds, 3),
    )


def do_series(req: SeriesRequest) -> SeriesResponse:
    if req.family == "H":
        return SeriesResponse(
            family="H", coefficients=h_series(req.order).integer_coefficients()
        )
    if req.family == "A":
        return SeriesResponse(
            family="A",
            coefficients=apollonian_series(max(req.order, 2)).integer_coefficients()[
                : req.order + 1
            ],
            growth_constant=apollonian_growth_constant(),
        )
    out = []
    for n in range(2, min(req.order, DEFAULT_CAP) + 1):
        rep = enumerate_Mn(n)
        out.append({"n": n, "coefficients": rep.coefficients})
    return SeriesResponse(family="M", coefficients=out)


def do_verify(req: VerifyRequest) -> VerifyResponse:
    tri3 = Triangulation3D.from_json(req.triangulation)
    ok, diags = verify_membership(tri3)
    return VerifyResponse(ok=ok, diagnostics=diags)


def do_build3d(req: Build3DRequest) -> Build3DResponse:
    tt = TripleTree.from_json(req.triple)
    tri3 = triple_to_triangulation(tt)
    return Build3DResponse(triangulation=tri3.to_json())


def do_certify(req: CertifyRequest) -> CertifyResponse:
    tri3 = Triangulation3D.from_json(req.triangulation)
    lc = find_tree_avoiding_lc(tri3)
    if lc is None:
        ok, diags = verify_membership(tri3)
        raise MembershipFailed(diags or ["NoCertificate"])
    dvf = morse_from_lc(lc, tri3)
    tt = triangulation_to_triple(tri3)
    return CertifyResponse(
        certificate=lc.to_json(), gradient=dvf.to_json(), triple=tt.to_json()
    )


def do_sample(req: SampleRequest) -> SampleResponse:
    config = ChainConfig(
        x=req.x,
        n_min=req.n_min,
        n_max=req.n_max,
        steps=req.steps,
        seed=req.seed,
    )
    pool = None
    if req.calibrated and req.n_max <= DEFAULT_CAP:
        pool = restart_pool(config)
        exact: dict[int, float] = {}
        for tt in pool:
            exact[tt.n] = exact.get(tt.n, 0.0) + req.x**tt.loops
        config.f_weights = {n: 1.0 / v for n, v in exact.items() if v > 0}
        config.restart_every = req.restart_every or 20
        config.thinning = req.thinning or config.restart_every
    else:
        config.tune = True
        config.thinning = req.thinning or 1
        config.validate_every = 0
    result = run_chain(config, pool=pool)
    est = z_star_estimate(result)
    return SampleResponse(
        histogram=[
            {"n": n, "loops": k, "visits": v, "f": result.f_weights.get(n, 1.0)}
            for (n, k), v in sorted(result.histogram.items())
        ],
        f_weights=result.f_weights,
        ratios={n: r for n, r in est["ratios"].items()},
        z_star=est["z_star"],
        z_star_error=est["error"],
        coverage=result.coverage,
        move_stats=result.move_stats,
    )


def do_catalog(req: CatalogRequest) -> CatalogResponse:
    entries = catalog(req.n)
    loops: dict[int, int] = {}
    for tt in entries:
        loops[tt.loops] = loops.get(tt.loops, 0) + 1
    return CatalogResponse(
        n=req.n,
        entries=[dict(tt.to_json(), loops=tt.loops) for tt in entries],
        loop_counts=dict(sorted(loops.items())),
    )


app = FastAPI(
    title="ttlab",
    description="Triple trees: enumeration, 3-sphere bijections, certificates, sampling",
)


def _wrap(fn, req):
    try:
        return fn(req)
    except EnumerationCapExceeded as exc:
        raise HTTPException(status_code=413, detail=str(exc))
    except (TripleRejected, MembershipFailed, DegenerateSize) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/")
def info():
    return {
        "format": FORMAT_VERSION,
        "endpoints": [
            "/enumerate",
            "/series",
            "/verify",
            "/build3d",
            "/certify",
            "/sample",
            "/catalog",
        ],
        "hierarchical_counts": [hierarchical_count(n) for n in range(2, 8)],
    }


@app.post("/enumerate", response_model=EnumerateResponse)
def enumerate_endpoint(req: EnumerateRequest):
    if req.extended:
        raise HTTPException(
            status_code=413, detail="extended enumeration is CLI-only"
        )
    return _wrap(do_enumerate, req)


@app.post("/series", response_model=SeriesResponse)
def series_endpoint(req: SeriesRequest):
    return _wrap(do_series, req)


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(req: VerifyRequest):
    return _wrap(do_verify, req)


@app.post("/build3d", response_model=Build3DResponse)
def build3d_endpoint(req: Build3DRequest):
    return _wrap(do_build3d, req)


@app.post("/certify", response_model=CertifyResponse)
def certify_endpoint(req: CertifyRequest):
    return _wrap(do_certify, req)


@app.post("/sample", response_model=SampleResponse)
def sample_endpoint(req: SampleRequest):
    return _wrap(do_sample, req)


@app.post("/catalog", response_model=CatalogResponse)
def catalog_endpoint(req: CatalogRequest):
    return _wrap(do_catalog, req)


def bounds_endpoint_data(n: int) -> dict:
    return bounds_report(n)
