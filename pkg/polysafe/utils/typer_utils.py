import dataclasses
import inspect
from typing import Annotated

import typer


def dataclass_cli(func=None, *, env_var_prefix: str = "POLYSAFE_"):
    """Expose the fields of a dataclass as typer parameters of ``func``.

    ``func`` takes the dataclass as its first (and only) argument. Fields carry
    ``metadata={"cli": "argument"}`` to become positional arguments and
    ``metadata={"help": ...}`` for the help text; every other field becomes an
    option that can also be set through ``{env_var_prefix}{FIELD_NAME}``.

    Modified from https://github.com/fastapi/typer/issues/154#issuecomment-1544876144
    """
    if func is None:
        return lambda f: dataclass_cli(f, env_var_prefix=env_var_prefix)

    sig = inspect.signature(func)
    param = list(sig.parameters.values())[0]
    dataclass_cls = param.annotation
    assert dataclasses.is_dataclass(dataclass_cls), f"{func.__name__} must take a dataclass, got {dataclass_cls}"

    fields = {f.name: f for f in dataclasses.fields(dataclass_cls)}
    signature = inspect.signature(dataclass_cls.__init__)
    old_parameters = list(signature.parameters.values())
    if len(old_parameters) > 0 and old_parameters[0].name == "self":
        del old_parameters[0]

    new_parameters = []
    for param in old_parameters:
        metadata = fields[param.name].metadata
        help_text = metadata.get("help")
        if metadata.get("cli") == "argument":
            marker = typer.Argument(help=help_text, show_default=False)
        else:
            env_var_name = f"{env_var_prefix}{param.name.upper()}"
            marker = typer.Option(envvar=env_var_name, help=help_text)
        new_annotation = Annotated[param.annotation, marker]
        new_parameters.append(param.replace(annotation=new_annotation))

    def wrapped(**kwargs):
        try:
            data = dataclass_cls(**kwargs)
        except ValueError as e:
            raise typer.BadParameter(str(e)) from e
        return func(data)

    wrapped.__signature__ = signature.replace(parameters=new_parameters, return_annotation=inspect.Signature.empty)
    wrapped.__doc__ = func.__doc__
    wrapped.__name__ = func.__name__
    wrapped.__qualname__ = func.__qualname__

    return wrapped
