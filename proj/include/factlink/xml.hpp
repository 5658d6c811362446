#pragma once

// Small non-validating XML reader, enough for syndication feeds.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace factlink {

struct XmlNode {
  std::string name;  ///< qualified name as written, e.g. "content:encoded"
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  ///< concatenated character data of this element only
  std::vector<XmlNode> children;

  const XmlNode* child(std::string_view name) const;
  std::vector<const XmlNode*> children_named(std::string_view name) const;
  /// Text of the first child with this name, or empty.
  std::string child_text(std::string_view name) const;
  const std::string* attribute(std::string_view name) const;
};

/// Parses a document and returns its root element. Throws ParseError with the
/// byte offset of the first problem. Handles comments, CDATA, processing
/// instructions, a DOCTYPE without internal subset and the predefined and
/// numeric character references.
XmlNode parse_xml(std::string_view document);

/// Decodes &amp; &lt; &gt; &quot; &apos; &nbsp; and numeric references; unknown
/// entities are kept verbatim.
std::string decode_entities(std::string_view text);

/// Plain text of an HTML fragment: tags removed (script and style with their
/// content), entities decoded, whitespace collapsed.
std::string strip_html(std::string_view html);

}  // namespace factlink
