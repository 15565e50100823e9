"""HTTP adapter.

Routes validate transport-level shape, delegate to the runtime, and
return views; no session or pipeline logic lives here. Domain errors map
1:1 onto structured bodies ``{"code": ..., "message": ...}`` with a fixed
status per error type, so clients can branch on ``code`` alone.
"""

from __future__ import annotations

from fastapi import Body, FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .. import __version__
from ..errors import (
    BadPosition,
    BadRequest,
    CorruptLog,
    DyadBusy,
    EmptyInput,
    InsufficientData,
    InvalidProfile,
    InvalidTopic,
    MalformedOutput,
    PayloadTooLarge,
    ProviderUnavailable,
    SessionEnded,
    TurntalkError,
    UnknownCard,
    UnknownCollection,
    UnknownDyad,
    UnknownGuide,
    UnknownSession,
    UnrecognizedAudio,
    WrongState,
)
from .runtime import Runtime

STATUS_BY_ERROR = {
    UnknownDyad: 404,
    UnknownSession: 404,
    UnknownCard: 404,
    UnknownGuide: 404,
    UnknownCollection: 404,
    WrongState: 409,
    DyadBusy: 409,
    SessionEnded: 409,
    BadRequest: 400,
    InvalidTopic: 400,
    InvalidProfile: 400,
    BadPosition: 400,
    EmptyInput: 400,
    UnrecognizedAudio: 422,
    InsufficientData: 422,
    PayloadTooLarge: 413,
    ProviderUnavailable: 503,
    MalformedOutput: 502,
    CorruptLog: 500,
}


def status_for(error: TurntalkError) -> int:
    return STATUS_BY_ERROR.get(type(error), 500)


def create_app(runtime: Runtime) -> FastAPI:
    app = FastAPI(title="turntalk", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(TurntalkError)
    async def turntalk_error_handler(request: Request, error: TurntalkError):
        body = {"code": error.code, "message": error.message}
        if isinstance(error, InvalidProfile):
            body["violations"] = [str(v) for v in error.violations]
        return JSONResponse(status_code=status_for(error), content=body)

    # -- meta -----------------------------------------------------------------

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "providers": runtime.config.providers,
        }

    # -- dyads ----------------------------------------------------------------

    @app.post("/dyads", status_code=201)
    def create_dyad(record: dict = Body(...)):
        return runtime.create_profile(record).to_record()

    @app.get("/dyads")
    def list_dyads():
        return [p.to_record() for p in runtime.engine.dyads()]

    @app.get("/dyads/{dyad_id}")
    def get_dyad(dyad_id: str):
        return runtime.engine.get_dyad(dyad_id).to_record()

    @app.put("/dyads/{dyad_id}")
    def update_dyad(dyad_id: str, record: dict = Body(...)):
        return runtime.update_profile(dyad_id, record).to_record()

    @app.post("/dyads/{dyad_id}/images", status_code=201)
    async def upload_custom_image(
        dyad_id: str, label: str = Form(...), image: UploadFile = File(...)
    ):
        payload = await image.read()
        asset_id = runtime.add_custom_image(
            dyad_id, label, payload, image.content_type or "application/octet-stream"
        )
        return {"asset_id": asset_id, "label": label}

    # -- assets ------------------------------------------------------------------

    @app.get("/assets/{asset_id}")
    def get_asset(asset_id: str):
        found = runtime.assets.get(asset_id)
        if found is None:
            return JSONResponse(
                status_code=404,
                content={"code": "UnknownAsset", "message": f"no asset {asset_id!r}"},
            )
        payload, mime = found
        return Response(content=payload, media_type=mime)

    # -- sessions ------------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def start_session(body: dict = Body(...)):
        dyad_id = body.get("dyad_id")
        if not isinstance(dyad_id, str) or not dyad_id:
            raise BadRequest("dyad_id is required")
        topic = body.get("topic")
        if not isinstance(topic, dict):
            raise BadRequest("topic must be an object with a 'kind'")
        return runtime.start_session(dyad_id, topic).view()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return runtime.session_view(session_id)

    @app.post("/sessions/{session_id}/utterance")
    def submit_utterance(session_id: str, body: dict = Body(...)):
        text = body.get("text")
        if not isinstance(text, str):
            raise BadRequest("text is required")
        return runtime.submit_utterance_text(session_id, text).view()

    @app.post("/sessions/{session_id}/utterance/audio")
    async def submit_utterance_audio(session_id: str, audio: UploadFile = File(...)):
        payload = await audio.read()
        return runtime.submit_utterance_audio(session_id, payload).view()

    @app.post("/sessions/{session_id}/guides/{guide_id}/example")
    def reveal_example(session_id: str, guide_id: str):
        return runtime.reveal_example(session_id, guide_id).view()

    @app.post("/sessions/{session_id}/pass")
    def pass_turn(session_id: str, body: dict = Body(...)):
        from_state = body.get("from_state")
        if not isinstance(from_state, str):
            raise BadRequest("from_state is required ('parent_turn' or 'child_turn')")
        source = body.get("source", "ui_button")
        return runtime.pass_turn(session_id, from_state, source).view()

    @app.post("/sessions/{session_id}/cards/{card_id}/select")
    def select_card(session_id: str, card_id: str):
        return runtime.select_card(session_id, card_id).view()

    @app.delete("/sessions/{session_id}/selections/{position}")
    def deselect_card(session_id: str, position: int):
        return runtime.deselect_card(session_id, position).view()

    @app.post("/sessions/{session_id}/deck/refresh")
    def refresh_deck(session_id: str):
        return runtime.refresh_deck(session_id).view()

    @app.post("/sessions/{session_id}/end")
    def end_session(session_id: str):
        return runtime.end_session(session_id)

    @app.get("/sessions/{session_id}/transcript", response_class=PlainTextResponse)
    def transcript(session_id: str, guides: bool = False):
        return runtime.transcript(session_id, include_guides=guides)

    # -- analytics ---------------------------------------------------------------------

    @app.get("/reports/usage")
    def usage_report(k: int = 20, basis: str = "recommended"):
        if basis not in ("recommended", "selected"):
            raise BadRequest("basis must be 'recommended' or 'selected'")
        return runtime.usage_report(k=k, basis=basis)

    return app
