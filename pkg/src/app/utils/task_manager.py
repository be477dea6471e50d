import functools
from enum import Enum
from typing import Callable, Generic, ParamSpec, TypeVar

from app.shared.utils import parallel_map

T = TypeVar("T")
T_Retval = TypeVar("T_Retval")
T_ParamSpec = ParamSpec("T_ParamSpec")


class TaskStatus(Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


def _label(value: object) -> str:
    return repr(value) if isinstance(value, (int, float, str)) else type(value).__name__


class Task(Generic[T]):
    def __init__(
        self,
        func: Callable[..., T],
        id: str,
        status: TaskStatus = TaskStatus.PENDING,
    ) -> None:
        self.func: Callable[..., T] = func
        self.id: str = id
        self.status: TaskStatus = status
        self.result: T | None = None
        self.metadata: dict = {}

    def add_metadata(
        self,
        metadata: dict,
    ):
        self.metadata.update(metadata)

    def run(
        self,
    ) -> "Task[T]":
        self.status = TaskStatus.RUNNING
        try:
            self.result = self.func()
            self.status = TaskStatus.COMPLETED
        except Exception as e:
            self.status = TaskStatus.FAILED
            self.add_metadata({"exception": e})
        return self

    @staticmethod
    def create_task(
        func: Callable[T_ParamSpec, T_Retval],
        id: str | None = None,
    ) -> Callable[T_ParamSpec, "Task[T_Retval]"]:
        """Turn ``func`` into a factory of deferred calls; the task id defaults to the call signature."""

        @functools.wraps(func)
        def wrapper(
            *args: T_ParamSpec.args,
            **kwargs: T_ParamSpec.kwargs,
        ) -> "Task[T_Retval]":
            partial_function = functools.partial(func, *args, **kwargs)
            task_id = id
            if task_id is None:
                shown = [_label(a) for a in args] + [f"{k}={_label(v)}" for k, v in kwargs.items()]
                task_id = f"{func.__name__}({', '.join(shown)})"
            return Task(func=partial_function, id=task_id)

        return wrapper


class TaskManager:
    """Runs tasks in insertion order; ``thread_number`` > 1 spreads them over workers."""

    def __init__(self, thread_number: int = 1) -> None:
        self.thread_number = thread_number
        self.tasks: list[Task] = []
        self.completed_tasks: list[Task] = []
        self.failed_tasks: list[Task] = []

    def add_task(
        self,
        task: Task,
    ):
        self.tasks.append(task)

    def run_tasks(
        self,
    ) -> list[Task]:
        finished = parallel_map(Task.run, self.tasks, self.thread_number)
        for task in finished:
            if task.status is TaskStatus.COMPLETED:
                self.completed_tasks.append(task)
            elif task.status is TaskStatus.FAILED:
                self.failed_tasks.append(task)
        return finished
