import logging
import time

from fastapi import FastAPI, Depends, HTTPException, Request
from sqlalchemy.orm import Session
from sqlalchemy import text
from starlette.middleware.cors import CORSMiddleware

from src.database.db import get_db
from src.routes import experiments, regime, runs
from src.conf import messages
from src.conf.config import settings

logging.basicConfig(level=settings.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
logger = logging.getLogger(__name__)

app = FastAPI(title="SPDE regime lab")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.middleware('http')
async def custom_middleware(request: Request, call_next):
    start_time = time.time()
    response = await call_next(request)
    during = time.time() - start_time
    response.headers['performance'] = str(during)
    return response


@app.get("/", description="Main Page")
async def root():
    return {"message": "SPDE regime lab", "docs": "/docs"}


@app.get("/api/healthchecker")
def healthchecker(db: Session = Depends(get_db)):
    try:
        result = db.execute(text("SELECT 1")).fetchone()
        if result is None:
            raise HTTPException(status_code=500, detail=messages.DATABASE_NOT_CONFIGURED)
        return {"message": "Welcome to the SPDE regime lab!"}
    except Exception as e:
        logger.error("health check failed: %s", e)
        raise HTTPException(status_code=500, detail=messages.DATABASE_CONNECTION_ERROR)


app.include_router(regime.router, prefix='/api')
app.include_router(experiments.router, prefix='/api')
app.include_router(runs.router, prefix='/api')
