"""Deduplicated landscape tree: applications -> nested packages -> classes -> operations."""

from __future__ import annotations

from typing import Iterator

from .wire import OperationIdentity

AppKey = tuple[str, str]  # (hostname, app_name)


def make_app_key(hostname: str, app_name: str) -> AppKey:
    return (hostname, app_name)


def app_key_to_str(key: AppKey) -> str:
    return f"{key[0]}/{key[1]}"


def make_class_id(hostname: str, app_name: str, package_path: tuple[str, ...], class_name: str) -> str:
    return f"{hostname}/{app_name}/" + ".".join((*package_path, class_name))


class ClassNode:
    __slots__ = ("name", "class_id", "operations")

    def __init__(self, name: str, class_id: str) -> None:
        self.name = name
        self.class_id = class_id
        self.operations: set[str] = set()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "classId": self.class_id,
            "operations": sorted(self.operations),
        }


class PackageNode:
    __slots__ = ("name", "package_id", "subpackages", "classes")

    def __init__(self, name: str, package_id: str) -> None:
        self.name = name
        self.package_id = package_id
        self.subpackages: dict[str, PackageNode] = {}
        self.classes: dict[str, ClassNode] = {}

    def to_dict(self) -> dict:
        # Children serialized in name order so identical trees serialize identically
        # regardless of insertion order.
        return {
            "name": self.name,
            "packageId": self.package_id,
            "packages": [self.subpackages[n].to_dict() for n in sorted(self.subpackages)],
            "classes": [self.classes[n].to_dict() for n in sorted(self.classes)],
        }


class ApplicationTree:
    """Structure tree of one monitored application. Nodes are added, never removed."""

    def __init__(self, hostname: str, app_name: str) -> None:
        self.hostname = hostname
        self.app_name = app_name
        self.root_packages: dict[str, PackageNode] = {}
        self._classes_by_id: dict[str, ClassNode] = {}
        self._package_count = 0

    @property
    def app_key(self) -> AppKey:
        return (self.hostname, self.app_name)

    def insert(self, identity: OperationIdentity) -> str:
        """Add an operation, creating missing package/class ancestors. Idempotent."""
        packages = self.root_packages
        prefix: list[str] = []
        node: PackageNode | None = None
        for segment in identity.package_path:
            prefix.append(segment)
            node = packages.get(segment)
            if node is None:
                node = PackageNode(segment, f"{self.hostname}/{self.app_name}/" + ".".join(prefix))
                packages[segment] = node
                self._package_count += 1
            packages = node.subpackages

        class_container = node.classes if node is not None else self._rootless_classes()
        cls = class_container.get(identity.class_name)
        if cls is None:
            class_id = make_class_id(
                self.hostname, self.app_name, identity.package_path, identity.class_name
            )
            cls = ClassNode(identity.class_name, class_id)
            class_container[identity.class_name] = cls
            self._classes_by_id[class_id] = cls
        cls.operations.add(identity.operation_name)
        return cls.class_id

    def _rootless_classes(self) -> dict[str, ClassNode]:
        # Classes with an empty package path live in an implicit default package
        # so the tree stays a strict hierarchy.
        node = self.root_packages.get("(default)")
        if node is None:
            node = PackageNode("(default)", f"{self.hostname}/{self.app_name}/(default)")
            self.root_packages["(default)"] = node
            self._package_count += 1
        return node.classes

    def class_count(self) -> int:
        return len(self._classes_by_id)

    def package_count(self) -> int:
        return self._package_count

    def class_ids(self) -> list[str]:
        return sorted(self._classes_by_id)

    def get_class(self, class_id: str) -> ClassNode | None:
        return self._classes_by_id.get(class_id)

    def iter_packages(self) -> Iterator[PackageNode]:
        stack = [self.root_packages[n] for n in sorted(self.root_packages, reverse=True)]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.subpackages[n] for n in sorted(node.subpackages, reverse=True))

    def to_dict(self) -> dict:
        return {
            "hostname": self.hostname,
            "appName": self.app_name,
            "packages": [self.root_packages[n].to_dict() for n in sorted(self.root_packages)],
        }


class Landscape:
    """All monitored applications, keyed by (hostname, app_name)."""

    def __init__(self) -> None:
        self._apps: dict[AppKey, ApplicationTree] = {}

    def insert(self, hostname: str, app_name: str, identity: OperationIdentity) -> str:
        key = (hostname, app_name)
        tree = self._apps.get(key)
        if tree is None:
            tree = ApplicationTree(hostname, app_name)
            self._apps[key] = tree
        return tree.insert(identity)

    def get(self, key: AppKey) -> ApplicationTree | None:
        return self._apps.get(key)

    def app_keys(self) -> list[AppKey]:
        return sorted(self._apps)

    def __len__(self) -> int:
        return len(self._apps)
