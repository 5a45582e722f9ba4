from rest_framework.pagination import PageNumberPagination
from rest_framework.response import Response


class PaginacionBitacora(PageNumberPagination):
    """Páginas de 50 ejecuciones; ?page_size=N hasta 500."""
    page_size = 50
    page_size_query_param = 'page_size'
    max_page_size = 500

    def get_paginated_response(self, data):
        return Response({
            'count': self.page.paginator.count,
            'pagina': self.page.number,
            'paginas': self.page.paginator.num_pages,
            'next': self.get_next_link(),
            'previous': self.get_previous_link(),
            'results': data,
        })
