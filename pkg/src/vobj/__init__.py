"""Value-semantics objects built on copy-on-write lists.

Classes compile to plain list layouts plus generated accessor commands;
objects are ordinary values, copied only when a shared one is written.
"""
# ruff: noqa: F401
from .baseline import (
                       HandleClass,
                       HandleTable,
                       handle_create,
                       handle_destroy,
                       handle_get,
                       handle_set,
                       live_count,
                       register_handle_class,
)
from .compiler import (
                       CallContext,
                       CompiledClass,
                       MethodBinding,
                       base_call,
                       compile_class,
                       construct_default,
                       construct_named,
                       construct_positional,
                       dispatch_virtual,
                       get_field,
                       import_methods,
                       set_field,
                       static_get,
                       static_set,
                       update_field,
)
from .dsl import (
                       ClassDecl,
                       ConstructorDecl,
                       FieldDecl,
                       MethodDecl,
                       parse_class,
                       parse_classes,
)
from .env import Environment, VariableRef, env_get, env_set
from .errors import *
from .expand import expand
from .native import (
                       NativePoint,
                       NativeTypeDescriptor,
                       native_new,
                       register_native_class,
                       register_native_point,
                       register_native_type,
                       value_to_native,
)
from .registry import Registry, bind_method, invoke, register_command
from .value import (
                       EMPTY,
                       Kind,
                       Ledger,
                       Value,
                       as_value,
                       dict_get,
                       dict_set,
                       footprint_bytes,
                       intern,
                       list_get,
                       list_set,
                       new_dict,
                       new_list,
                       new_text,
                       parse_list,
                       to_text,
)

__version__ = "0.1.0"
