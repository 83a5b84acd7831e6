import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {"criteria": {}, "info": []}
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion (slow)")


class Recorder:
    def __init__(self, store):
        self._store = store

    def criterion(self, number, title, passed, detail):
        self._store["criteria"][number] = (title, bool(passed), detail)
        return bool(passed)

    def info(self, number, text):
        self._store["info"].append((number, text))


@pytest.fixture
def acceptance(request):
    return Recorder(request.config.stash[_RESULTS])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash[_RESULTS]
    if not store["criteria"] and not store["info"]:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for number in sorted(store["criteria"]):
        title, passed, detail = store["criteria"][number]
        tr.write_line(f"{'PASS' if passed else 'FAIL'} #{number} {title}: {detail}")
    for number, text in store["info"]:
        tr.write_line(f"INFO #{number} {text}")
