import unittest
from unittest.mock import MagicMock

from sqlalchemy.orm import Session

from src.database.models import Run, RunKind
from src.repository.runs import get_runs, get_run_by_id, create, remove
from src.schemas import RunCreate


class TestRunsRepository(unittest.IsolatedAsyncioTestCase):

    def setUp(self):
        self.session = MagicMock(spec=Session)

    async def test_get_runs(self):
        runs = [Run(), Run(), Run()]
        self.session.query().order_by().offset().limit().all.return_value = runs
        result = await get_runs(db=self.session)
        self.assertEqual(result, runs)

    async def test_get_runs_by_kind(self):
        runs = [Run(kind=RunKind.simulate)]
        self.session.query().filter_by().order_by().offset().limit().all.return_value = runs
        result = await get_runs(db=self.session, kind=RunKind.simulate)
        self.assertEqual(result, runs)
        self.session.query().filter_by.assert_called_with(kind=RunKind.simulate)

    async def test_get_run_by_id(self):
        run = Run(id=3)
        self.session.query().filter_by().first.return_value = run
        result = await get_run_by_id(run_id=3, db=self.session)
        self.assertEqual(result, run)

    async def test_get_run_by_id_not_found(self):
        self.session.query().filter_by().first.return_value = None
        result = await get_run_by_id(run_id=3, db=self.session)
        self.assertIsNone(result)

    async def test_create(self):
        body = RunCreate(kind="regime_check", seed=7, config={"d": 1}, verdict={"weak_DAalpha": True},
                         checksum="0" * 64, summary={"admissible": True})
        result = await create(body, self.session)
        self.assertEqual(result.kind, RunKind.regime_check)
        self.assertEqual(result.seed, 7)
        self.assertEqual(result.config, body.config)
        self.assertEqual(result.verdict, body.verdict)
        self.assertEqual(result.checksum, body.checksum)
        self.session.add.assert_called_once_with(result)
        self.session.commit.assert_called_once()

    async def test_remove(self):
        run = Run(id=1)
        self.session.query().filter_by().first.return_value = run
        result = await remove(run_id=1, db=self.session)
        self.assertEqual(result, run)
        self.session.delete.assert_called_once_with(run)

    async def test_remove_not_found(self):
        self.session.query().filter_by().first.return_value = None
        result = await remove(run_id=1, db=self.session)
        self.assertIsNone(result)
        self.session.delete.assert_not_called()


if __name__ == '__main__':
    unittest.main()
