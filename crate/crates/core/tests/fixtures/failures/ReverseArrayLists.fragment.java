class ReverseArrayLists {
        // Some code here
        
        /*@
          @ assignable result[*];
          @*/
        for (int i = 0; i < lists.length; i++) {
            // Some code here
        }
        
        return result;
    }
}
