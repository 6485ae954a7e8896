"""
클래스 구조 문서(class-facts XML) 파서 및 직렬화

<model>
  <class name="a.A" kind="class" superclass="a.B">
    <implements name="java.io.Serializable"/>
    <field name="count" type="int" visibility="private"/>
    <method signature="run(a.C)" returns="void" visibility="public">
      <invokes receiver="a.C" signature="m()"/>
      <accesses owner="a.A" field="count"/>
      <references type="a.D"/>
    </method>
  </class>
</model>
"""
from pathlib import Path
from typing import Dict, List, Optional

from lxml import etree

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import VISIBILITIES, CLASS_KINDS
from parsers.base import BaseParser
from utils.errors import ModelValidationError
from utils.matching import did_you_mean, normalize_class_id
from utils.model import (
    ClassFacts, ClassModel, FieldFacts, MethodFacts, is_valid_class_id, validate_model
)

CLASS_CHILD_TAGS = ("implements", "field", "method")
METHOD_CHILD_TAGS = ("invokes", "accesses", "references")
DEFAULT_VISIBILITY = "package"


class ClassFactsParser(BaseParser):
    """class-facts XML 문서 파서 (lxml)"""

    FORMAT_NAME = "class-facts"

    def parse(self, text: str) -> ClassModel:
        root = self._parse_xml(text)
        if root.tag != "model":
            raise self._error(f"root element must be <model>, got <{root.tag}>", root.sourceline)

        classes: Dict[str, ClassFacts] = {}
        for element in root:
            if not isinstance(element.tag, str):
                continue
            if element.tag != "class":
                raise self._error(
                    f"unknown element <{element.tag}>{did_you_mean(element.tag, ['class'])}",
                    element.sourceline)
            facts = self._parse_class(element)
            if facts.class_id in classes:
                raise self._error(f"duplicate class id {facts.class_id}", element.sourceline)
            classes[facts.class_id] = facts

        model = ClassModel(classes=classes)
        violations = validate_model(model)
        if violations:
            raise ModelValidationError(violations)

        method_count = sum(len(c.methods) for c in classes.values())
        self.logger.info(f"클래스 {len(classes)}개, 메서드 {method_count}개 파싱")
        return model

    def _parse_xml(self, text: str):
        parser = etree.XMLParser(remove_comments=True, resolve_entities=False, no_network=True)
        try:
            return etree.fromstring(text.encode('utf-8'), parser)
        except etree.XMLSyntaxError as e:
            line, column = e.position if e.position else (None, None)
            raise self._error(f"XML syntax error: {e.msg}", line, column)

    def _required(self, element, attribute: str) -> str:
        value = element.get(attribute)
        if value is None or not value.strip():
            raise self._error(f"<{element.tag}> is missing {attribute}", element.sourceline)
        return value.strip()

    def _class_ref(self, element, attribute: str, required: bool = True) -> Optional[str]:
        """클래스 식별자 속성 (정규화 및 형식 검사)"""
        if not required and element.get(attribute) is None:
            return None
        value = normalize_class_id(self._required(element, attribute))
        if not is_valid_class_id(value):
            raise self._error(f"invalid class id {value!r} in <{element.tag}>", element.sourceline)
        return value

    def _keyword(self, element, attribute: str, allowed, default: str) -> str:
        value = (element.get(attribute) or default).strip()
        if value not in allowed:
            raise self._error(
                f"unknown {attribute} {value!r}{did_you_mean(value, allowed)}",
                element.sourceline)
        return value

    def _parse_class(self, element) -> ClassFacts:
        class_id = self._class_ref(element, "name")
        kind = self._keyword(element, "kind", CLASS_KINDS, "class")
        superclass = self._class_ref(element, "superclass", required=False)

        interfaces = set()
        fields: List[FieldFacts] = []
        methods: List[MethodFacts] = []

        for child in element:
            if not isinstance(child.tag, str):
                continue
            if child.tag == "implements":
                interfaces.add(self._class_ref(child, "name"))
            elif child.tag == "field":
                fields.append(FieldFacts(
                    name=self._required(child, "name"),
                    type_name=self._required(child, "type"),
                    visibility=self._keyword(child, "visibility", VISIBILITIES, DEFAULT_VISIBILITY),
                ))
            elif child.tag == "method":
                methods.append(self._parse_method(child))
            else:
                raise self._error(
                    f"unknown element <{child.tag}> in class {class_id}"
                    f"{did_you_mean(child.tag, CLASS_CHILD_TAGS)}",
                    child.sourceline)

        return ClassFacts(
            class_id=class_id,
            kind=kind,
            superclass=superclass,
            interfaces=frozenset(interfaces),
            fields=tuple(fields),
            methods=tuple(methods),
        )

    def _parse_method(self, element) -> MethodFacts:
        signature = self._required(element, "signature")
        invoked = set()
        accessed = set()
        referenced = set()

        for child in element:
            if not isinstance(child.tag, str):
                continue
            if child.tag == "invokes":
                invoked.add((self._class_ref(child, "receiver"), self._required(child, "signature")))
            elif child.tag == "accesses":
                accessed.add((self._class_ref(child, "owner"), self._required(child, "field")))
            elif child.tag == "references":
                referenced.add(self._required(child, "type"))
            else:
                raise self._error(
                    f"unknown element <{child.tag}> in method {signature}"
                    f"{did_you_mean(child.tag, METHOD_CHILD_TAGS)}",
                    child.sourceline)

        return MethodFacts(
            signature=signature,
            visibility=self._keyword(element, "visibility", VISIBILITIES, DEFAULT_VISIBILITY),
            return_type=(element.get("returns") or "void").strip(),
            invoked=frozenset(invoked),
            accessed_fields=frozenset(accessed),
            referenced_types=frozenset(referenced),
        )


def parse_class_facts(text: str) -> ClassModel:
    """class-facts 문서 파싱 (검증 통과한 모델 반환)"""
    return ClassFactsParser().parse(text)


def format_class_facts(model: ClassModel) -> str:
    """
    ClassModel을 class-facts XML로 직렬화 (클래스/집합 원소 정렬)

    Args:
        model: 클래스 모델

    Returns:
        UTF-8 XML 문자열
    """
    root = etree.Element("model")
    for facts in model:
        node = etree.SubElement(root, "class", name=facts.class_id, kind=facts.kind)
        if facts.superclass:
            node.set("superclass", facts.superclass)
        for name in sorted(facts.interfaces):
            etree.SubElement(node, "implements", name=name)
        for item in facts.fields:
            etree.SubElement(node, "field", name=item.name, type=item.type_name,
                             visibility=item.visibility)
        for method in facts.methods:
            m = etree.SubElement(node, "method", signature=method.signature,
                                 returns=method.return_type, visibility=method.visibility)
            for receiver, signature in sorted(method.invoked):
                etree.SubElement(m, "invokes", receiver=receiver, signature=signature)
            for owner, field_name in sorted(method.accessed_fields):
                etree.SubElement(m, "accesses", owner=owner, field=field_name)
            for type_name in sorted(method.referenced_types):
                etree.SubElement(m, "references", type=type_name)

    body = etree.tostring(root, pretty_print=True, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body
